"""Pilot assignment and MMSE channel estimation at the anchor instant.

Pilots are time-multiplexed: UE k transmits once, at instant t_k in
1..tau_p, and the APs estimate the channel at the anchor lam = tau_p + 1.
Because the channel ages between t_k and lam, the effective estimate
quality carries a rho_k[lam - t_k]^2 factor, and UEs sharing a pilot
instant contaminate each other.

All second-order statistics needed by the rate expressions are collected in
EstimationStatistics: the per-link estimate covariance Q, its trace, the
mixed traces tr(Q_kl R_il), and the contamination cross-traces
tr(Qbar_kil) for pilot-sharing pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .aging import AgingProfile, FrameConfig
from .sampling import complex_normal, cov_factor
from .scenario import Scenario


@dataclass
class PilotAssignment:
    """Pilot instants t[k] in 1..tau_p and per-UE pilot powers (watts)."""

    t: np.ndarray            # (K,) ints
    p_pilot: np.ndarray      # (K,) watts
    tau_p: int

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=int)
        self.p_pilot = np.asarray(self.p_pilot, dtype=float)
        if self.t.min() < 1 or self.t.max() > self.tau_p:
            raise ValueError("pilot instants must lie in 1..tau_p")
        if np.any(self.p_pilot <= 0):
            raise ValueError("pilot powers must be positive")

    def sharers(self, k: int) -> np.ndarray:
        """Indices of all UEs on UE k's pilot instant, k included."""
        return np.nonzero(self.t == self.t[k])[0]


def assign_pilots(K: int, tau_p: int, seed, p_pilot=0.1) -> PilotAssignment:
    """Balanced random assignment: group sizes differ by at most one.

    A random UE permutation is dealt round-robin over the tau_p instants,
    so with K <= tau_p every UE gets a private pilot.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    order = rng.permutation(K)
    t = np.empty(K, dtype=int)
    t[order] = np.arange(K) % tau_p + 1
    return PilotAssignment(t=t, p_pilot=np.broadcast_to(np.asarray(p_pilot, float), (K,)).copy(),
                           tau_p=tau_p)


@dataclass
class EstimationStatistics:
    """Second-order statistics of the anchor-instant MMSE estimates.

    tr_qr[k, i, l] = tr(Q_kl R_il); tr_qbar[k, i, l] = tr(Qbar_kil), zero
    unless i shares UE k's pilot.  gamma holds the scalar per-link estimate
    variances and is only set when the correlation model is uncorrelated
    (where Q = gamma * I).
    """

    psi: np.ndarray            # (K, L, N, N) inverse pilot-signal covariance
    q: np.ndarray              # (K, L, N, N) estimate covariance
    tr_q: np.ndarray           # (K, L) real
    tr_qr: np.ndarray          # (K, K, L) real
    tr_qbar: np.ndarray        # (K, K, L) complex
    gamma: Optional[np.ndarray]  # (K, L) or None
    sigma2: float
    rho_pilot: np.ndarray      # (K,) correlation over the pilot-to-anchor lag
    estimator: np.ndarray = field(repr=False, default=None)  # (K, L, N, N), maps z to h_hat


def estimation_stats(scenario: Scenario, pilots: PilotAssignment,
                     profile: AgingProfile, frame: FrameConfig,
                     sigma2: float) -> EstimationStatistics:
    """Build Psi, Q, and the trace tables used by every rate expression."""
    dims = scenario.dims
    K, L, N = dims.K, dims.L, dims.N
    if sigma2 <= 0:
        raise ValueError("noise power must be positive")
    r = scenario.correlation.R
    lam = frame.lam
    rho_p = profile.rho_table[np.arange(K), lam - pilots.t]   # (K,)

    # pilot-signal covariance per pilot instant and AP, inverted once per AP
    eye = sigma2 * np.eye(N)
    psi_t = np.empty((pilots.tau_p, L, N, N), dtype=complex)
    for t in range(1, pilots.tau_p + 1):
        members = np.nonzero(pilots.t == t)[0]
        s = np.einsum("k,klab->lab", pilots.p_pilot[members], r[members]) \
            if members.size else np.zeros((L, N, N), dtype=complex)
        psi_t[t - 1] = np.linalg.inv(s + eye)
    psi = psi_t[pilots.t - 1]                                  # (K, L, N, N)

    scale = (rho_p ** 2) * pilots.p_pilot                      # (K,)
    q = scale[:, None, None, None] * np.einsum("klab,klbc,klcd->klad", r, psi, r)
    tr_q = np.einsum("klaa->kl", q).real
    tr_qr = np.einsum("klab,ilba->kil", q, r).real

    tr_qbar = np.zeros((K, K, L), dtype=complex)
    pref = rho_p * np.sqrt(pilots.p_pilot)                     # (K,)
    for k in range(K):
        share = pilots.sharers(k)
        t_mix = np.einsum("ilab,lbc,lca->il", r[share], psi[k], r[k])
        tr_qbar[k, share] = pref[k] * pref[share, None] * t_mix

    gamma = None
    if scenario.correlation.asd_deg is None:
        beta = scenario.lsf.beta
        denom = np.empty((K, L))
        for k in range(K):
            share = pilots.sharers(k)
            denom[k] = pilots.p_pilot[share] @ beta[share] + sigma2
        gamma = scale[:, None] * beta ** 2 / denom

    estimator = pref[:, None, None, None] * np.einsum("klab,klbc->klac", r, psi)
    return EstimationStatistics(psi=psi, q=q, tr_q=tr_q, tr_qr=tr_qr,
                                tr_qbar=tr_qbar, gamma=gamma, sigma2=sigma2,
                                rho_pilot=rho_p, estimator=estimator)


def qbar(scenario: Scenario, stats: EstimationStatistics,
         pilots: PilotAssignment, k: int, i: int, l: int) -> np.ndarray:
    """Cross-covariance matrix Qbar_kil between UE k's estimate and UE i's
    channel at AP l; zero when the two UEs use different pilot instants."""
    n = scenario.dims.N
    if pilots.t[i] != pilots.t[k]:
        return np.zeros((n, n), dtype=complex)
    r = scenario.correlation.R
    pref = stats.rho_pilot[k] * np.sqrt(pilots.p_pilot[k]) * \
        stats.rho_pilot[i] * np.sqrt(pilots.p_pilot[i])
    return pref * r[i, l] @ stats.psi[k, l] @ r[k, l]


def error_covariance(stats: EstimationStatistics, scenario: Scenario) -> np.ndarray:
    """Anchor-instant estimation-error covariance R - Q per link."""
    return scenario.correlation.R - stats.q


def sample_estimates(scenario: Scenario, pilots: PilotAssignment,
                     profile: AgingProfile, frame: FrameConfig,
                     stats: EstimationStatistics, rng: np.random.Generator,
                     trials: int):
    """Draw anchor channels and the matching MMSE estimates, batched.

    Returns (h_anchor, h_hat), each (trials, K, L, N).  The estimates are
    produced by literally running the pilot phase: each UE's channel is
    propagated from the anchor back to its pilot instant, received pilots
    are superimposed per instant with thermal noise, and the linear MMSE
    estimator is applied.
    """
    dims = scenario.dims
    K, L, N = dims.K, dims.L, dims.N
    fac = cov_factor(scenario.correlation.R)
    lam = frame.lam

    h_anchor = np.einsum("klnm,tklm->tkln", fac, complex_normal(rng, (trials, K, L, N)))
    h_innov = np.einsum("klnm,tklm->tkln", fac, complex_normal(rng, (trials, K, L, N)))
    noise = np.sqrt(stats.sigma2) * complex_normal(rng, (trials, pilots.tau_p, L, N))

    rho_p = profile.rho_table[np.arange(K), lam - pilots.t]
    rho_bar_p = profile.rho_bar_table[np.arange(K), lam - pilots.t]
    # channel at each UE's own pilot instant, anchored at lam
    h_pilot = rho_p[None, :, None, None] * h_anchor + rho_bar_p[None, :, None, None] * h_innov

    received = noise
    amp = np.sqrt(pilots.p_pilot)
    for t in range(1, pilots.tau_p + 1):
        members = np.nonzero(pilots.t == t)[0]
        if members.size:
            received[:, t - 1] += np.einsum("k,tkln->tln", amp[members], h_pilot[:, members])

    z_per_ue = received[:, pilots.t - 1]                       # (T, K, L, N)
    h_hat = np.einsum("klnm,tklm->tkln", stats.estimator, z_per_ue)
    return h_anchor, h_hat
