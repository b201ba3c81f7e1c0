"""Temporal channel correlation under UE mobility, and related frame bookkeeping.

The per-UE correlation between channel realizations spaced n samples apart
follows the Jakes model, rho[n] = J0(2*pi*f_D*T_s*n), parameterized by the
normalized Doppler shift f_D_Ts = f_D * T_s.  A resource block spans tau_c
samples; the first tau_p carry one pilot each and instant lam = tau_p + 1 is
the anchor at which channels are estimated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .special import besselj0, besselj0_first_zero

_SPEED_OF_LIGHT = 299792458.0


def rho(f_d_ts, n):
    """Temporal correlation coefficient J0(2 pi f_D_Ts n), elementwise."""
    f_d_ts = np.asarray(f_d_ts, dtype=float)
    if np.any(f_d_ts < 0):
        raise ValueError("normalized Doppler shift must be >= 0")
    return besselj0(2.0 * np.pi * f_d_ts * np.asarray(n, dtype=float))


def rho_bar(f_d_ts, n):
    """Innovation weight sqrt(1 - rho^2); pairs with rho to unit power."""
    r = rho(f_d_ts, n)
    return np.sqrt(np.clip(1.0 - r * r, 0.0, None))


def doppler_from_speed(speed_kmh: float, f_c_hz: float, t_s: float) -> float:
    """Normalized Doppler f_D*T_s for a UE speed in km/h at carrier f_c."""
    return speed_kmh / 3.6 * f_c_hz / _SPEED_OF_LIGHT * t_s


def design_tau_c(f_d_ts_max: float) -> int:
    """Largest block length over which rho stays positive for every UE.

    Returns floor(z1 / (2 pi f)) with z1 the first zero of J0, i.e. the last
    lag before the fastest UE's correlation changes sign.
    """
    if f_d_ts_max <= 0:
        raise ValueError("block length is unbounded at zero Doppler")
    return int(np.floor(besselj0_first_zero() / (2.0 * np.pi * f_d_ts_max)))


@dataclass(frozen=True)
class FrameConfig:
    """Resource-block layout: tau_p pilot samples followed by data samples.

    tau_c counts all samples in the block; data occupy instants
    lam..tau_c inclusive with lam = tau_p + 1.
    """

    tau_c: int
    tau_p: int
    t_s: float = 1e-5  # sample period in seconds

    def __post_init__(self):
        if self.tau_p < 1:
            raise ValueError("need at least one pilot sample")
        if self.tau_c <= self.tau_p:
            raise ValueError("tau_c must exceed tau_p")
        if self.t_s <= 0:
            raise ValueError("sample period must be positive")

    @property
    def lam(self) -> int:
        return self.tau_p + 1

    @property
    def data_instants(self) -> np.ndarray:
        return np.arange(self.lam, self.tau_c + 1)


@dataclass
class AgingProfile:
    """Tabulated per-UE correlation sequences over one resource block.

    rho_table[k, n] = J0(2 pi f_D_Ts[k] n) for n = 0..tau_c, with
    rho_bar_table the matching innovation weights.
    """

    f_d_ts: np.ndarray            # (K,)
    rho_table: np.ndarray         # (K, tau_c + 1)
    rho_bar_table: np.ndarray     # (K, tau_c + 1)
    frame: FrameConfig = field(repr=False, default=None)

    def rho_at(self, lag):
        """rho for every UE at the given lag(s): shape (K,) + shape(lag)."""
        return self.rho_table[:, lag]


def aging_profile(frame: FrameConfig, f_d_ts, k: int = None) -> AgingProfile:
    """Tabulate rho / rho_bar for all lags 0..tau_c.

    f_d_ts may be a scalar (shared by all UEs; pass k to broadcast to that
    many rows) or a per-UE array.
    """
    f = np.atleast_1d(np.asarray(f_d_ts, dtype=float))
    if f.size == 1 and k is not None:
        f = np.full(k, f[0])
    lags = np.arange(frame.tau_c + 1)
    table = rho(f[:, None], lags[None, :])
    bar = np.sqrt(np.clip(1.0 - table * table, 0.0, None))
    return AgingProfile(f_d_ts=f, rho_table=table, rho_bar_table=bar, frame=frame)
