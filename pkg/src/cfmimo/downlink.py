"""Downlink spectral efficiency with statistics-aware precoding power.

Every AP transmits to every UE using conjugate beamforming on its local
estimate, scaled by power coefficients mu[k, l] that satisfy the per-AP
average power constraint sum_k mu[k, l] tr(Q_kl) <= 1 (met with equality by
both built-in policies).  Two reception models:

- coherent: all APs send the same symbol stream per UE, so their
  deterministic beams add in amplitude at the UE;
- non-coherent: APs send independent streams, decoded successively, so the
  deterministic contributions add in power only.

UEs have no downlink pilots; they rely on the deterministic (mean) channel,
so the effective SINR carries the receiving UE's own aging factor
rho_k[n - lam]^2 on both the desired and the pilot-contaminated terms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .aging import AgingProfile, FrameConfig
from .estimation import EstimationStatistics, PilotAssignment
from .results import SEResult


@dataclass
class DownlinkPowerControl:
    """Per-link precoding power shares mu[k, l] and the AP power budget p_d."""

    mu: np.ndarray    # (K, L)
    p_d: float        # watts
    mode: str

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=float)
        if np.any(self.mu < 0):
            raise ValueError("power shares must be nonnegative")


def downlink_power_control(stats: EstimationStatistics, beta: np.ndarray,
                           mode: str, p_d: float) -> DownlinkPowerControl:
    """Build mu for a policy; both policies spend each AP's full budget.

    "full": equal weighting of the served UEs, mu_kl = 1 / sum_i tr(Q_il).
    "sccpc": weight UEs inversely to their mean channel gain so weak UEs
    get a larger share, mu_kl proportional to 1 / beta_bar_k.
    """
    col = stats.tr_q.sum(axis=0)                 # (L,)
    if np.any(col <= 0):
        raise ValueError("an AP has zero total estimate power")
    if mode == "full":
        mu = np.broadcast_to(1.0 / col, stats.tr_q.shape).copy()
    elif mode == "sccpc":
        inv_bar = 1.0 / beta.mean(axis=1)        # (K,)
        denom = inv_bar @ stats.tr_q             # (L,)
        mu = inv_bar[:, None] / denom[None, :]
    else:
        raise ValueError(f"unknown downlink power mode: {mode!r}")
    return DownlinkPowerControl(mu=mu, p_d=p_d, mode=mode)


def per_ap_power(stats: EstimationStatistics, dpc: DownlinkPowerControl) -> np.ndarray:
    """Average radiated power per AP, in units of p_d; 1.0 means the budget
    is met with equality."""
    return np.einsum("kl,kl->l", dpc.mu, stats.tr_q)


def _common_terms(stats: EstimationStatistics, pilots: PilotAssignment,
                  profile: AgingProfile, frame: FrameConfig):
    lags = frame.data_instants - frame.lam
    rho_d2 = profile.rho_table[:, lags] ** 2
    return lags, rho_d2


def downlink_sinr_coherent(stats: EstimationStatistics, pilots: PilotAssignment,
                           profile: AgingProfile, frame: FrameConfig,
                           dpc: DownlinkPowerControl) -> SEResult:
    """Effective SINR when all APs beamform a common stream per UE."""
    K, L = stats.tr_q.shape
    _, rho_d2 = _common_terms(stats, pilots, profile, frame)
    root_mu = np.sqrt(dpc.mu)

    amp = np.einsum("kl,kl->k", root_mu, stats.tr_q)           # (K,)
    num = rho_d2 * dpc.p_d * amp[:, None] ** 2

    # tr(Q_il R_kl): transmissions to every UE i leak onto UE k's channel
    leak = dpc.p_d * np.einsum("il,ikl->k", dpc.mu, stats.tr_qr)
    den = np.broadcast_to(leak[:, None], num.shape).copy() + stats.sigma2
    for k in range(K):
        share = pilots.sharers(k)
        others = share[share != k]
        if others.size == 0:
            continue
        cont = np.abs(np.einsum("il,il->i", root_mu[others], stats.tr_qbar[k, others])) ** 2
        den[k] += rho_d2[k] * dpc.p_d * cont.sum()
    return SEResult.from_sinr("coherent", num / den, frame)


def downlink_sinr_noncoherent(stats: EstimationStatistics, pilots: PilotAssignment,
                              profile: AgingProfile, frame: FrameConfig,
                              dpc: DownlinkPowerControl) -> SEResult:
    """Effective SINR when APs send independent streams, decoded successively.

    The resulting SE equals the sum of per-AP log terms of the successive
    decoder; only the combined SINR is reported here.
    """
    K, L = stats.tr_q.shape
    _, rho_d2 = _common_terms(stats, pilots, profile, frame)

    amp2 = np.einsum("kl,kl->k", dpc.mu, stats.tr_q ** 2)      # (K,)
    num = rho_d2 * dpc.p_d * amp2[:, None]

    leak = dpc.p_d * np.einsum("il,ikl->k", dpc.mu, stats.tr_qr)
    den = np.broadcast_to(leak[:, None], num.shape).copy() + stats.sigma2
    for k in range(K):
        share = pilots.sharers(k)
        others = share[share != k]
        if others.size == 0:
            continue
        cont = np.einsum("il,il->", dpc.mu[others], np.abs(stats.tr_qbar[k, others]) ** 2)
        den[k] += rho_d2[k] * dpc.p_d * cont
    return SEResult.from_sinr("noncoherent", num / den, frame)


def downlink_sinr_coherent_uncorrelated(beta: np.ndarray, stats: EstimationStatistics,
                                        pilots: PilotAssignment, profile: AgingProfile,
                                        frame: FrameConfig,
                                        dpc: DownlinkPowerControl) -> SEResult:
    """Reduced coherent expression for R = beta I, in terms of gamma and beta."""
    if stats.gamma is None:
        raise ValueError("reduced expression needs uncorrelated statistics (gamma)")
    gamma = stats.gamma
    K, L = gamma.shape
    n_antennas = stats.q.shape[-1]
    _, rho_d2 = _common_terms(stats, pilots, profile, frame)
    root_mu = np.sqrt(dpc.mu)

    amp = np.einsum("kl,kl->k", root_mu, gamma)
    num = rho_d2 * dpc.p_d * (n_antennas ** 2) * amp[:, None] ** 2

    leak = dpc.p_d * n_antennas * np.einsum("il,il,kl->k", dpc.mu, gamma, beta)
    den = np.broadcast_to(leak[:, None], num.shape).copy() + stats.sigma2
    for k in range(K):
        share = pilots.sharers(k)
        others = share[share != k]
        if others.size == 0:
            continue
        cross = np.sqrt(gamma[k][None, :] * gamma[others])
        cont = np.abs(np.einsum("il,il->i", root_mu[others], cross)) ** 2
        den[k] += rho_d2[k] * dpc.p_d * (n_antennas ** 2) * cont.sum()
    return SEResult.from_sinr("coherent-uncorrelated", num / den, frame)
