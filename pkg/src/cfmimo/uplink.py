"""Uplink spectral efficiency: CPU-combined cell-free and small-cell bounds.

Cell-free: every AP forwards a locally matched-filtered statistic; the CPU
combines them with per-UE weight vectors a_k[n].  The achievable SINR at
data instant n decays with the UE's temporal correlation rho_k[n - lam]
over the anchor-to-instant lag.  Weight choices: equal weights (plain
averaging) or statistics-optimal weights that maximize the SINR per
instant (LSFD).

Small-cell: each UE is served by the single best AP, which decodes using
its local channel estimate; the bound conditions on the estimate, so the
rate is an average of log2(1 + instantaneous SINR) over estimate draws.
For N = 1 this average has a closed form via the exponential integral.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .aging import AgingProfile, FrameConfig
from .estimation import EstimationStatistics, PilotAssignment, sample_estimates
from .results import SEResult
from .sampling import stream
from .scenario import Scenario
from .special import expe1

_LN2 = np.log(2.0)


@dataclass
class UplinkPowerControl:
    """Per-UE data power coefficients: UE k transmits with power p_u * eta[k]."""

    eta: np.ndarray   # (K,) in (0, 1]
    p_u: float        # watts

    def __post_init__(self):
        self.eta = np.asarray(self.eta, dtype=float)
        if np.any(self.eta < 0) or np.any(self.eta > 1.0 + 1e-12):
            raise ValueError("power coefficients must lie in [0, 1]")


def full_power(K: int, p_u: float) -> UplinkPowerControl:
    return UplinkPowerControl(eta=np.ones(K), p_u=p_u)


def sccpc_cellfree(beta: np.ndarray, p_u: float) -> UplinkPowerControl:
    """Statistics-based fairness rule: equalize every UE's aggregate received
    power across the whole AP set.  The weakest UE transmits at full power."""
    total = beta.sum(axis=1)
    return UplinkPowerControl(eta=total.min() / total, p_u=p_u)


def sccpc_smallcell(beta: np.ndarray, serving_ap: np.ndarray, p_u: float) -> UplinkPowerControl:
    """Same fairness rule for the small-cell system, using each UE's gain to
    its own serving AP (chosen beforehand under full power)."""
    own = beta[np.arange(beta.shape[0]), serving_ap]
    return UplinkPowerControl(eta=own.min() / own, p_u=p_u)


def _pilot_partners(pilots: PilotAssignment):
    """List of arrays: for each k, the other UEs sharing its pilot instant."""
    return [pilots.sharers(k)[pilots.sharers(k) != k] for k in range(len(pilots.t))]


def _den_diag(stats: EstimationStatistics, pc: UplinkPowerControl):
    """n-independent part of the denominator per (k, l): interference-plus-
    noise seen through AP l's filtered statistic for UE k."""
    return pc.p_u * np.einsum("kil,i->kl", stats.tr_qr, pc.eta) + stats.sigma2 * stats.tr_q


def uplink_sinr_cf(stats: EstimationStatistics, pilots: PilotAssignment,
                   profile: AgingProfile, frame: FrameConfig,
                   pc: UplinkPowerControl, weights) -> SEResult:
    """Effective SINR of CPU combining with the given weight vectors.

    weights: (L,) shared by all UEs and instants, (K, L) per UE, or
    (K, n_data, L) per UE and instant.  The expression is invariant to
    per-(k, n) weight rescaling.
    """
    K, L = stats.tr_q.shape
    instants = frame.data_instants
    n_data = instants.size
    lags = instants - frame.lam
    w = np.asarray(weights, dtype=complex)
    if w.shape == (L,):
        w = np.broadcast_to(w, (K, n_data, L))
    elif w.shape == (K, L):
        w = np.broadcast_to(w[:, None, :], (K, n_data, L))
    elif w.shape != (K, n_data, L):
        raise ValueError("weights must be (L,), (K, L) or (K, n_data, L)")
    if np.any(np.all(w == 0, axis=-1)):
        raise ValueError("all-zero weight vector")

    rho_d = profile.rho_table[:, lags]                         # (K, n)
    den_diag = _den_diag(stats, pc)                            # (K, L)
    num_amp = np.einsum("knl,kl->kn", w.conj(), stats.tr_q)    # a^H b
    num = (rho_d ** 2) * pc.p_u * pc.eta[:, None] * np.abs(num_amp) ** 2
    den = np.einsum("knl,kl->kn", np.abs(w) ** 2, den_diag)

    partners = _pilot_partners(pilots)
    for k in range(K):
        others = partners[k]
        if others.size == 0:
            continue
        # coherent pilot-contamination beam: |a^H tr(Qbar_k i .)|^2
        amp = np.einsum("nl,il->in", w[k].conj(), stats.tr_qbar[k, others])
        den[k] += pc.p_u * np.einsum("i,in->n",
                                     pc.eta[others],
                                     (profile.rho_table[others][:, lags] ** 2) * np.abs(amp) ** 2)
    return SEResult.from_sinr("cf", num / den, frame)


def mf_weights(L: int) -> np.ndarray:
    """Equal combining weights; any common scale gives the same SINR."""
    return np.full(L, 1.0 / L)


def lsfd_weights(stats: EstimationStatistics, pilots: PilotAssignment,
                 profile: AgingProfile, frame: FrameConfig,
                 pc: UplinkPowerControl, method: str = "lowrank"):
    """Statistics-optimal combining weights and the SINR they achieve.

    Returns (weights, sinr) with weights (K, n_data, L) and sinr (K, n_data).
    The per-instant optimal weights solve M a = b where M is the denominator
    matrix: diagonal interference-plus-noise plus one rank-1 term per
    pilot-sharing UE.  "lowrank" exploits that structure (the diagonal part
    does not depend on n); "dense" assembles and solves M explicitly and is
    kept as a slow reference.
    """
    K, L = stats.tr_q.shape
    instants = frame.data_instants
    lags = instants - frame.lam
    n_data = instants.size
    den_diag = _den_diag(stats, pc)
    partners = _pilot_partners(pilots)
    rho_d2 = profile.rho_table[:, lags] ** 2                   # (K, n)

    weights = np.zeros((K, n_data, L), dtype=complex)
    quad = np.zeros((K, n_data))
    for k in range(K):
        support = stats.tr_q[k] > 0
        if not np.any(support):
            raise ValueError(f"UE {k} has zero estimate power at every AP")
        d = den_diag[k, support]
        b = stats.tr_q[k, support]
        others = partners[k]
        if method == "dense":
            c = stats.tr_qbar[k, others][:, support]           # (m, Ls)
            for j in range(n_data):
                m = np.diag(d).astype(complex)
                for ii, i in enumerate(others):
                    m += pc.p_u * pc.eta[i] * rho_d2[i, j] * np.outer(c[ii], c[ii].conj())
                a = np.linalg.solve(m, b.astype(complex))
                weights[k, j, support] = a
                quad[k, j] = np.real(b @ a)
            continue
        bd = b / d
        quad_base = float(b @ bd)
        if others.size == 0:
            weights[k, :, support] = bd[:, None]
            quad[k, :] = quad_base
            continue
        u = stats.tr_qbar[k, others][:, support].T             # (Ls, m)
        ud = u / d[:, None]
        g = ud.conj().T @ b.astype(complex)                    # (m,)
        core = u.conj().T @ ud                                 # (m, m)
        wgt = pc.p_u * pc.eta[others][None, :] * rho_d2[others][:, :].T  # (n, m)
        # 1/w blows up where rho hits an exact zero; a huge diagonal entry
        # simply deactivates that rank-1 term, which is the correct limit
        inv_w = 1.0 / np.maximum(wgt, 1e-290)
        s = core[None, :, :] + inv_w[:, :, None] * np.eye(others.size)[None]
        rhs = np.broadcast_to(g[None, :, None], (n_data, others.size, 1))
        x = np.linalg.solve(s, rhs)[..., 0]                    # (n, m)
        quad[k] = quad_base - np.real(np.einsum("m,nm->n", g.conj(), x))
        weights[k][:, support] = bd[None, :] - np.einsum("lm,nm->nl", ud, x)
    # the Woodbury subtraction can go epsilon-negative when contamination
    # dominates; the true quadratic form is nonnegative
    sinr = rho_d2 * pc.p_u * pc.eta[:, None] * np.maximum(quad, 0.0)
    return weights, sinr


def uplink_se_lsfd(stats, pilots, profile, frame, pc) -> SEResult:
    """SE with statistics-optimal combining, via the quadratic-form shortcut."""
    weights, sinr = lsfd_weights(stats, pilots, profile, frame, pc)
    res = SEResult.from_sinr("lsfd", sinr, frame)
    res.extras["weights"] = weights
    return res


def uplink_se_mf(stats, pilots, profile, frame, pc) -> SEResult:
    """SE with equal combining weights across APs."""
    res = uplink_sinr_cf(stats, pilots, profile, frame, pc, mf_weights(stats.tr_q.shape[1]))
    res.scheme = "mf"
    return res


def uplink_sinr_uncorrelated(beta: np.ndarray, stats: EstimationStatistics,
                             pilots: PilotAssignment, profile: AgingProfile,
                             frame: FrameConfig, pc: UplinkPowerControl,
                             weights) -> SEResult:
    """Reduced SINR expression for uncorrelated antennas (R = beta I).

    Written directly in terms of the scalar estimate variances gamma and the
    channel gains beta; must agree with uplink_sinr_cf when the correlation
    model is uncorrelated.
    """
    if stats.gamma is None:
        raise ValueError("reduced expression needs uncorrelated statistics (gamma)")
    gamma = stats.gamma
    K, L = gamma.shape
    n_antennas = stats.q.shape[-1]
    instants = frame.data_instants
    n_data = instants.size
    lags = instants - frame.lam
    w = np.asarray(weights, dtype=complex)
    if w.shape == (L,):
        w = np.broadcast_to(w, (K, n_data, L))
    elif w.shape == (K, L):
        w = np.broadcast_to(w[:, None, :], (K, n_data, L))

    rho_d = profile.rho_table[:, lags]
    num_amp = np.einsum("knl,kl->kn", w.conj(), gamma)
    num = (rho_d ** 2) * pc.p_u * pc.eta[:, None] * (n_antennas ** 2) * np.abs(num_amp) ** 2

    mix = np.einsum("kl,il,i->kl", gamma, beta, pc.eta)        # sum_i eta_i gamma_kl beta_il
    den = n_antennas * np.einsum("knl,kl->kn", np.abs(w) ** 2,
                                 pc.p_u * mix + stats.sigma2 * gamma)
    partners = _pilot_partners(pilots)
    for k in range(K):
        others = partners[k]
        if others.size == 0:
            continue
        cross = np.sqrt(gamma[k][None, :] * gamma[others])     # (m, L)
        amp = np.einsum("nl,il->in", w[k].conj(), cross)
        den[k] += pc.p_u * (n_antennas ** 2) * np.einsum(
            "i,in->n", pc.eta[others],
            (profile.rho_table[others][:, lags] ** 2) * np.abs(amp) ** 2)
    return SEResult.from_sinr("cf-uncorrelated", num / den, frame)


def _smallcell_conditional_moments(h_hat: np.ndarray, scenario: Scenario,
                                   stats: EstimationStatistics,
                                   pc: UplinkPowerControl, cand: np.ndarray):
    """Per-draw ingredients of the estimate-conditioned small-cell SINR.

    h_hat: (T, K, L, N) estimate draws; cand: (K, C) candidate AP indices.
    Returns (cross2, quad0, quadq) with shapes (T, K, K, C), (T, K, C),
    (T, K, K, C): squared estimate cross-products |h_hat_kl^H h_hat_il|^2,
    the aging-independent quadratic form of the total received covariance,
    and the quadratic forms h_hat^H Q_il h_hat whose aging-weighted sum is
    subtracted per instant.
    """
    r = scenario.correlation.R
    t_draws, K, L, N = h_hat.shape
    c_count = cand.shape[1]
    own = np.take_along_axis(h_hat, cand[None, :, :, None], axis=2)   # (T, K, C, N)
    other = h_hat[:, :, cand, :]                                      # (T, i, K, C, N)
    cross2 = np.abs(np.einsum("tkcn,tikcn->tikc", own.conj(), other)) ** 2

    base = pc.p_u * np.einsum("i,ilab->lab", pc.eta, r) + stats.sigma2 * np.eye(N)
    base_k = base[cand]                                               # (K, C, N, N)
    quad0 = np.real(np.einsum("tkca,kcab,tkcb->tkc", own.conj(), base_k, own))
    q_cand = stats.q[:, cand, :, :]                                   # (i, K, C, N, N)
    quadq = np.real(np.einsum("tkca,ikcab,tkcb->tikc", own.conj(), q_cand, own))
    return cross2, quad0, quadq


def _smallcell_mc_perinstant(cross2, quad0, quadq, profile, frame,
                             pc: UplinkPowerControl, instants):
    """Mean over draws of log2(1 + SINR) per (k, candidate, instant)."""
    lags = np.asarray(instants) - frame.lam
    rho2 = profile.rho_table[:, lags] ** 2                     # (K, n)
    t_draws, K, c_count = quad0.shape
    out = np.empty((K, c_count, lags.size))
    eta_p = pc.p_u * pc.eta
    cross2_p = cross2 * eta_p[None, :, None, None]
    quadq_p = quadq * eta_p[None, :, None, None]
    # cross2[t, k, k, c] is ||h_hat||^4, the desired-signal term
    own4_p = cross2_p[:, np.arange(K), np.arange(K), :]        # (T, K, C)
    # chunk the instants so the (T, K, C, n) intermediates stay bounded
    step = max(1, int(2e7 // max(1, t_draws * K * c_count)))
    for s in range(0, lags.size, step):
        r2 = rho2[:, s:s + step]                               # (K, nc)
        num = r2[None, :, None, :] * own4_p[..., None]
        inter = np.einsum("tikc,in->tkcn", cross2_p, r2) - num
        cond_var = quad0[..., None] - np.einsum("tikc,in->tkcn", quadq_p, r2)
        sinr = num / (inter + cond_var)
        out[:, :, s:s + step] = np.log2(1.0 + sinr).mean(axis=0)
    return out


def smallcell_se(scenario: Scenario, stats: EstimationStatistics,
                 pilots: PilotAssignment, profile: AgingProfile,
                 frame: FrameConfig, pc: UplinkPowerControl,
                 mode: str = "auto", seed=0, est_draws: int = 200,
                 candidate_aps=None, serving_ap=None) -> SEResult:
    """Small-cell SE: best serving AP per UE under the estimate-conditioned
    bound.

    mode "closed_form" evaluates the N = 1 exponential-integral expression;
    "monte_carlo" averages the conditional SINR over estimate draws (any N);
    "auto" picks the closed form when N = 1.  candidate_aps limits the
    serving-AP search to the strongest candidates by channel gain (None:
    search all APs).  serving_ap (K,) pins the association instead of
    maximizing, e.g. to keep the selection made under full power when
    re-evaluating with power control.
    """
    K, L = stats.tr_q.shape
    n_antennas = scenario.dims.N
    if mode == "auto":
        mode = "closed_form" if n_antennas == 1 else "monte_carlo"
    instants = frame.data_instants

    if mode == "closed_form":
        if n_antennas != 1:
            raise ValueError("closed form requires single-antenna APs")
        se_inst = smallcell_closed_form_perinstant(
            scenario.lsf.beta, stats, pilots, profile, frame, pc, instants)
        se_pair = se_inst.sum(axis=2) / frame.tau_c            # (K, L)
        if serving_ap is None:
            serving = se_pair.argmax(axis=1)
        else:
            serving = np.asarray(serving_ap, dtype=int)
        per_inst = se_inst[np.arange(K), serving]              # (K, n)
        res = SEResult.from_sinr("sc", 2.0 ** per_inst - 1.0, frame)
        res.extras.update(serving_ap=serving, mode=mode)
        return res

    if serving_ap is not None:
        cand = np.asarray(serving_ap, dtype=int).reshape(K, 1)
    elif candidate_aps is None or candidate_aps >= L:
        cand = np.broadcast_to(np.arange(L), (K, L)).copy()
    else:
        cand = np.argsort(-scenario.lsf.beta, axis=1)[:, :candidate_aps]
    rng = seed if isinstance(seed, np.random.Generator) else stream(seed, 17)
    _, h_hat = sample_estimates(scenario, pilots, profile, frame, stats, rng, est_draws)
    cross2, quad0, quadq = _smallcell_conditional_moments(h_hat, scenario, stats, pc, cand)
    mean_log = _smallcell_mc_perinstant(cross2, quad0, quadq, profile, frame, pc, instants)
    se_pair = mean_log.sum(axis=2) / frame.tau_c
    best = se_pair.argmax(axis=1)
    serving = cand[np.arange(K), best]
    per_inst = mean_log[np.arange(K), best]
    res = SEResult.from_sinr("sc", 2.0 ** per_inst - 1.0, frame)
    res.extras.update(serving_ap=serving, mode=mode, est_draws=est_draws)
    return res


def smallcell_closed_form_perinstant(beta: np.ndarray, stats: EstimationStatistics,
                                     pilots: PilotAssignment, profile: AgingProfile,
                                     frame: FrameConfig, pc: UplinkPowerControl,
                                     instants) -> np.ndarray:
    """Per-(k, l, instant) achievable SE of single-antenna local decoding.

    Conditioned on the local estimate, the SINR is a ratio of |h_hat|^2
    scaled terms; averaging log2(1 + SINR) over the exponential |h_hat|^2
    gives a difference of scaled exponential integrals.  Pilot-sharing UEs'
    estimates are collinear with the desired one, which yields the
    interference-to-signal ratio term a.
    """
    lags = np.asarray(instants) - frame.lam
    K, L = beta.shape
    gamma = stats.tr_q                                         # N = 1: tr(Q) = gamma
    rho2 = profile.rho_table[:, lags] ** 2                     # (K, n)

    # interference floor: total received power minus the part the (possibly
    # aged) estimates explain, plus noise; pilot sharers additionally show up
    # through a_ratio because their estimates are collinear with UE k's
    floor = np.empty((K, L, lags.size))
    a_ratio = np.zeros((K, L, lags.size))
    for k in range(K):
        share = pilots.sharers(k)
        others = share[share != k]
        sub = np.einsum("i,il,in->ln", pc.eta[share], gamma[share], rho2[share])
        floor[k] = pc.p_u * (pc.eta @ beta)[:, None] - pc.p_u * sub + stats.sigma2
        if others.size:
            own = pc.eta[k] * gamma[k][:, None] * rho2[k][None, :]
            with np.errstate(divide="ignore", invalid="ignore"):
                a_ratio[k] = np.einsum("i,il,in->ln", pc.eta[others], gamma[others],
                                       rho2[others]) / own
            a_ratio[k] = np.nan_to_num(a_ratio[k], nan=0.0, posinf=0.0)

    w = pc.p_u * pc.eta[:, None, None] * gamma[:, :, None] * rho2[:, None, :] / floor
    live = w > 0
    with np.errstate(divide="ignore"):
        arg_hi = np.where(live, 1.0 / np.where(live, w * (1.0 + a_ratio), 1.0), 1.0)
    se = np.where(live, expe1(arg_hi), 0.0)
    has_a = live & (a_ratio > 0)
    with np.errstate(divide="ignore"):
        arg_lo = np.where(has_a, 1.0 / np.where(has_a, w * a_ratio, 1.0), 1.0)
    se = se - np.where(has_a, expe1(arg_lo), 0.0)
    return se / _LN2
