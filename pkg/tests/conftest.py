"""Shared fixtures: small pre-built drops so each test file does not repeat
the scenario -> pilots -> statistics plumbing."""

import numpy as np
import pytest

from cfmimo import (FrameConfig, SystemDims, aging_profile, assign_pilots,
                    estimation_stats, generate_scenario)

SIGMA2 = 10.0 ** ((-96.0 - 30.0) / 10.0)   # -96 dBm in watts
P_PILOT = 0.1                              # 20 dBm
P_UL = 0.1
P_DL = 10.0 ** ((23.0 - 30.0) / 10.0)

# one line per acceptance criterion, printed after the test summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.ensure_newline()
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


def make_drop(L=4, K=3, N=2, tau_c=20, tau_p=2, f_d_ts=0.002, asd_deg=30.0,
              seed=7, area=500.0):
    """One deterministic drop with pilots and estimation statistics."""
    frame = FrameConfig(tau_c=tau_c, tau_p=tau_p)
    scn = generate_scenario(SystemDims(L=L, K=K, N=N), area, seed, True, asd_deg)
    profile = aging_profile(frame, f_d_ts, k=K)
    pilots = assign_pilots(K, tau_p, seed + 1, P_PILOT)
    stats = estimation_stats(scn, pilots, profile, frame, SIGMA2)
    return scn, pilots, profile, frame, stats


@pytest.fixture(scope="session")
def small_drop():
    """Correlated antennas, pilot sharing (K = 3 on tau_p = 2)."""
    return make_drop()


@pytest.fixture(scope="session")
def uncorrelated_drop():
    """R = beta I so the gamma-based reduced expressions apply."""
    return make_drop(N=3, asd_deg=None)


@pytest.fixture(scope="session")
def static_uncorrelated_drop():
    """No aging and uncorrelated antennas: the block-fading special case."""
    return make_drop(N=3, asd_deg=None, f_d_ts=0.0)


def rel_err(a, b):
    return np.max(np.abs(np.asarray(a) - np.asarray(b))
                  / np.maximum(np.abs(np.asarray(b)), np.finfo(float).tiny))
