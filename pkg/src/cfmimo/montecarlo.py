"""Monte Carlo estimation of the effective SINRs, for validating the
closed-form expressions.

The uplink and downlink oracles sample only the anchor channels.  Every
other random ingredient is integrated out exactly using nothing but its
defining second moment: data symbols (unit power), receiver and pilot
noise (sigma2), per-instant aging innovations (covariance R), and the
part of each pilot observation that does not involve the drawn channel.
For that last step the estimate of UE o is split as
h_hat_ol = E_ol (c_d h_dl + rest), where h_dl is whichever drawn channel
the current term correlates it with, c_d collects the pilot power and the
pilot-to-anchor correlation, and rest (other sharers, the own pilot-lag
innovation, noise) is independent of h_dl with a covariance fixed by the
model.  The moments the closed forms actually have to prove - means and
variances of the quadratics h^H E^H h and h^H E^H S E h - stay empirical.
Channels at different APs are independent, so variances of combined sums
are assembled per AP, which removes the pure cross-AP noise as well.

Trials are processed in fixed-size blocks with one RNG stream per
(seed, block) pair, so results are bit-identical for any worker count, and
jackknifing over blocks provides the standard errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .aging import AgingProfile, FrameConfig
from .estimation import EstimationStatistics, PilotAssignment, sample_estimates
from .downlink import DownlinkPowerControl
from .sampling import complex_normal, cov_factor, stream
from .scenario import Scenario
from .uplink import (UplinkPowerControl, _smallcell_conditional_moments,
                     _smallcell_mc_perinstant)


def _blocks(trials: int, block: int):
    """Fixed partition of the trial budget; the last block may be short."""
    sizes = [block] * (trials // block)
    if trials % block:
        sizes.append(trials % block)
    if not sizes:
        raise ValueError("need a positive trial count")
    return sizes


def _jackknife(stat_from_totals, block_arrays, block_sizes):
    """Leave-one-block-out standard error for a statistic of pooled sums.

    block_arrays: dict name -> (nblocks, ...) per-block sums;
    stat_from_totals(totals, count) -> ndarray statistic.
    """
    nb = len(block_sizes)
    totals = {k: v.sum(axis=0) for k, v in block_arrays.items()}
    total_n = float(sum(block_sizes))
    full = stat_from_totals(totals, total_n)
    if nb < 2:
        return full, np.full_like(full, np.nan)
    vals = []
    for b in range(nb):
        left = {k: totals[k] - v[b] for k, v in block_arrays.items()}
        vals.append(stat_from_totals(left, total_n - block_sizes[b]))
    vals = np.stack(vals)
    mean = vals.mean(axis=0)
    se = np.sqrt((nb - 1) / nb * ((vals - mean) ** 2).sum(axis=0))
    return full, se


def _norm_weights(weights, K, n_sel, L):
    w = np.asarray(weights, dtype=complex)
    if w.shape == (L,):
        w = np.broadcast_to(w, (K, n_sel, L))
    elif w.shape == (K, L):
        w = np.broadcast_to(w[:, None, :], (K, n_sel, L))
    elif w.shape != (K, n_sel, L):
        raise ValueError("weights must be (L,), (K, L) or (K, n_sel, L)")
    return w


def _check_instants(frame: FrameConfig, instants):
    instants = np.asarray(instants, dtype=int)
    if np.any(instants < frame.lam) or np.any(instants > frame.tau_c):
        raise ValueError("instants must lie in the data phase lam..tau_c")
    return instants


def _auto_block(block, cells):
    """Shrink the trial block when the per-trial working set gets large."""
    cap = max(10, int(2e7 // max(1, cells)))
    return min(block, cap)


def _pair_tables(scenario: Scenario, stats: EstimationStatistics,
                 pilots: PilotAssignment, profile: AgingProfile,
                 frame: FrameConfig):
    """Fixed matrices for the anchor-only oracles.

    For every ordered pair (d, o) of UEs on the same pilot instant, the
    estimate of o seen against the drawn channel of d is
    E_ol (c_d h_dl + rest) with rest independent of h_dl; crest holds the
    covariance of rest.  a maps h_dl to the conditional mean quadratic,
    m to the conditional variance quadratic; g / tg and gn / tn split the
    receiver-side quadratics h_hat^H R h_hat and |h_hat|^2 into their
    empirical part (in h_ol) and the exact rest trace.
    """
    dims = scenario.dims
    K, L, N = dims.K, dims.L, dims.N
    r = scenario.correlation.R
    e = stats.estimator
    eh = e.conj().transpose(0, 1, 3, 2)
    c = stats.rho_pilot * np.sqrt(pilots.p_pilot)              # (K,)
    rho_bar_p = profile.rho_bar_table[np.arange(K), frame.lam - pilots.t]

    crest = np.empty((K, L, N, N), dtype=complex)
    for d in range(K):
        others = pilots.sharers(d)[pilots.sharers(d) != d]
        crest[d] = pilots.p_pilot[d] * rho_bar_p[d] ** 2 * r[d] \
            + np.einsum("j,jlab->lab", pilots.p_pilot[others], r[others]) \
            + stats.sigma2 * np.eye(N)

    pd, po = [], []
    pair_idx = np.full((K, K), -1, dtype=int)
    for t in range(1, pilots.tau_p + 1):
        members = np.nonzero(pilots.t == t)[0]
        for d in members:
            for o in members:
                pair_idx[d, o] = len(pd)
                pd.append(d)
                po.append(o)
    pd = np.asarray(pd, dtype=int)
    po = np.asarray(po, dtype=int)

    a_stack = eh[po]                                           # (P, L, N, N)
    m_stack = np.einsum("plab,plbc,plcd->plad", e[po], crest[pd], eh[po])
    g = np.einsum("olab,ilbd,olde->oilae", eh, r, e)           # (K, K, L, N, N)
    tg = np.einsum("oilab,olba->oil", g, crest).real
    gn = np.einsum("olab,olbc->olac", eh, e)
    tn = np.einsum("olab,olba->ol", gn, crest).real
    return {"pd": pd, "po": po, "pair_idx": pair_idx, "c": c,
            "a": a_stack, "m": m_stack, "g": g, "tg": tg, "gn": gn, "tn": tn}


def _qmc_complex_normal(rng, nb, shape):
    """Standard complex normals from scrambled Sobol nets, one per cell.

    Every statistic the oracles accumulate involves the channel of a
    single (UE, AP) cell, so each cell gets its own independently
    scrambled net over its 2N real coordinates: the stratification then
    acts directly on the integrand instead of on arbitrary projections of
    one high-dimensional net.  Independent scrambles keep every point
    exactly CN(0, I)-distributed and cells mutually independent, so each
    block remains an unbiased estimator and the block jackknife still
    measures the error.  Drawing a power-of-two net and slicing keeps the
    Sobol balance warning-free for ragged last blocks.
    """
    *cells, n = shape
    flat = int(np.prod(cells, dtype=int))
    n2 = 1 << max(0, nb - 1).bit_length()
    out = np.empty((nb, flat, n), dtype=complex)
    for j in range(flat):
        eng = qmc.Sobol(d=2 * n, scramble=True, seed=rng)
        u = np.clip(eng.random(n2)[:nb], 2.0 ** -64, 1.0 - 2.0 ** -53)
        z = ndtri(u)
        out[:, j] = (z[:, :n] + 1j * z[:, n:]) / np.sqrt(2.0)
    return out.reshape((nb,) + tuple(shape))


def _pair_accumulate(scenario: Scenario, tables, seed, sizes):
    """Per-block sums of the sampled quadratics.

    s1q / s2q are first and second moments of q_p = h_d^H E_o^H h_d over
    the pilot-sharing pairs p = (d, o); so is the running outer-product sum
    of the drawn channels, from which every other quadratic follows by a
    fixed trace.
    """
    dims = scenario.dims
    K, L, N = dims.K, dims.L, dims.N
    fac = cov_factor(scenario.correlation.R)
    pd, a_stack = tables["pd"], tables["a"]
    acc = {k: [] for k in ["s1q", "s2q", "so"]}
    for b, nb in enumerate(sizes):
        white = _qmc_complex_normal(stream(seed, b), nb, (K, L, N))
        h = np.einsum("klnm,tklm->tkln", fac, white)
        hd = h[:, pd]                                          # (t, P, L, N)
        q = np.einsum("tpla,plab,tplb->tpl", hd.conj(), a_stack, hd)
        acc["s1q"].append(q.sum(0))
        acc["s2q"].append((np.abs(q) ** 2).sum(0))
        acc["so"].append(np.einsum("tkla,tklb->klab", h, h.conj()))
    return {k: np.stack(v) for k, v in acc.items()}


def _pair_moments(tables, totals, count):
    """Pooled per-AP moments of the oracle building blocks.

    meanx / varx / e2x: mean, variance, and second moment of
    x_p = h_hat_ol^H h_dl per pilot-sharing pair and AP; rq[o, c, l] is
    E[h_hat_ol^H R_cl h_hat_ol]; norme[o, l] is E[|h_hat_ol|^2].
    """
    pd, c = tables["pd"], tables["c"]
    so = totals["so"] / count
    mq = totals["s1q"] / count
    e2q = totals["s2q"] / count
    mm = np.einsum("plab,plba->pl", tables["m"], so[pd]).real
    c1 = c[pd][:, None]
    c2 = (c ** 2)[pd][:, None]
    meanx = c1 * mq
    varx = c2 * (e2q - np.abs(mq) ** 2) + mm
    e2x = c2 * e2q + mm
    c2o = (c ** 2)[:, None, None]
    rq = c2o * np.einsum("oclab,olba->ocl", tables["g"], so).real + tables["tg"]
    norme = (c ** 2)[:, None] * np.einsum("olab,olba->ol", tables["gn"], so).real \
        + tables["tn"]
    return meanx, varx, e2x, rq, norme


@dataclass
class SinrTermEstimates:
    """Empirical second moments of the combined uplink signal terms.

    ds: desired signal through the mean channel-estimate beam;
    bu: fluctuation of the desired beam around that mean;
    ca: leakage from the channel innovation over the anchor-to-instant lag;
    ui: per-interferer terms, (K, K, n) with the k = i slot zero;
    ns: thermal noise through the combiner.
    """

    ds: np.ndarray
    bu: np.ndarray
    ca: np.ndarray
    ui: np.ndarray
    ns: np.ndarray
    trials: int


@dataclass
class OracleResult:
    sinr: np.ndarray              # (K, n_sel)
    stderr: np.ndarray            # (K, n_sel) jackknife
    instants: np.ndarray
    trials: int
    terms: SinrTermEstimates = None
    extras: dict = field(default_factory=dict)


def uplink_oracle(scenario: Scenario, stats: EstimationStatistics,
                  pilots: PilotAssignment, profile: AgingProfile,
                  frame: FrameConfig, pc: UplinkPowerControl, weights,
                  instants, trials: int, seed=0, block: int = 512) -> OracleResult:
    """Estimate the combined uplink SINR terms by simulation.

    weights are held fixed across trials (they are statistics, not
    realizations); the SINR ratio can then be compared against the
    closed-form expression for the same weights.

    Only the anchor channels are drawn.  Symbols, noise, aging
    innovations, and the channel-independent part of each pilot
    observation are integrated out through their defining second moments;
    channels of UEs on a different pilot instant never enter h_hat_k, so
    their interference moment needs no sampled cross terms at all.  The
    estimator quadratics in the drawn channels stay empirical, which is
    the part the closed form has to prove.
    """
    dims = scenario.dims
    K, L, N = dims.K, dims.L, dims.N
    instants = _check_instants(frame, instants)
    lags = instants - frame.lam
    n_sel = instants.size
    w = _norm_weights(weights, K, n_sel, L)
    tables = _pair_tables(scenario, stats, pilots, profile, frame)
    n_pairs = tables["pd"].size
    block = _auto_block(block, K * L * N * N + n_pairs * L)
    sizes = _blocks(trials, block)
    arrays = _pair_accumulate(scenario, tables, seed, sizes)
    rho_d = profile.rho_table[:, lags]                     # (K, n_sel)
    rho_bar_d = profile.rho_bar_table[:, lags]
    aw2 = np.abs(w) ** 2                                   # (K, n_sel, L)

    eta_p = pc.p_u * pc.eta
    kk = np.arange(K)
    diag = tables["pair_idx"][kk, kk]
    off = np.nonzero(tables["pd"] != tables["po"])[0]

    def term_split(totals, count):
        meanx, varx, e2x, rq, norme = _pair_moments(tables, totals, count)
        ew = np.einsum("knl,kl->kn", w.conj(), meanx[diag])
        ds = (rho_d ** 2) * eta_p[:, None] * np.abs(ew) ** 2
        bu = eta_p[:, None] * (rho_d ** 2) * \
            np.einsum("knl,kl->kn", aw2, varx[diag])
        ca = eta_p[:, None] * (rho_bar_d ** 2) * \
            np.einsum("knl,kl->kn", aw2, rq[kk, kk])
        base = np.einsum("knl,kil->kin", aw2, rq)
        ui_pair = eta_p[None, :, None] * base
        for p in off:
            i, k = tables["pd"][p], tables["po"][p]
            mw = np.einsum("nl,l->n", w[k].conj(), meanx[p])
            vw = np.einsum("nl,l->n", aw2[k], varx[p])
            ui_pair[k, i] = eta_p[i] * (rho_d[i] ** 2 * (np.abs(mw) ** 2 + vw)
                                        + rho_bar_d[i] ** 2 * base[k, i])
        ui_pair[kk, kk] = 0.0
        ns = stats.sigma2 * np.einsum("knl,kl->kn", aw2, norme)
        return ds, bu, ca, ui_pair, ns

    def stat(totals, count):
        ds, bu, ca, ui_pair, ns = term_split(totals, count)
        return ds / (bu + ca + ui_pair.sum(axis=1) + ns)

    sinr, se = _jackknife(stat, arrays, sizes)
    totals = {k: v.sum(0) for k, v in arrays.items()}
    ds, bu, ca, ui_pair, ns = term_split(totals, float(trials))
    terms = SinrTermEstimates(ds=ds, bu=bu, ca=ca, ui=ui_pair, ns=ns, trials=trials)
    return OracleResult(sinr=sinr, stderr=se, instants=instants, trials=trials, terms=terms)


def downlink_oracle(scenario: Scenario, stats: EstimationStatistics,
                    pilots: PilotAssignment, profile: AgingProfile,
                    frame: FrameConfig, dpc: DownlinkPowerControl,
                    instants, trials: int, seed=0, mode: str = "coherent",
                    block: int = 512) -> OracleResult:
    """Estimate the downlink effective SINR by simulation.

    Same sampling scheme as the uplink oracle: only the receiver-side
    anchor channels are drawn, and each interfering beam is split into its
    projection on that channel (empirical) plus an independent remainder
    (integrated out exactly).  Beams built from a different pilot instant
    are independent of the receiver's channel, so their moment needs no
    sampled cross terms.  For the non-coherent mode the per-AP
    successive-decoding log terms are also reported; their sum telescopes
    to log2(1 + sinr), which the extras expose for consistency checks.
    extras["ap_power"] reports each AP's radiated power in units of p_d.
    """
    dims = scenario.dims
    K, L, N = dims.K, dims.L, dims.N
    instants = _check_instants(frame, instants)
    lags = instants - frame.lam
    n_sel = instants.size
    tables = _pair_tables(scenario, stats, pilots, profile, frame)
    n_pairs = tables["pd"].size
    block = _auto_block(block, K * L * N * N + n_pairs * L)
    sizes = _blocks(trials, block)
    arrays = _pair_accumulate(scenario, tables, seed, sizes)
    rho_d = profile.rho_table[:, lags]
    rho_bar_d = profile.rho_bar_table[:, lags]
    root_mu = np.sqrt(dpc.mu)
    kk = np.arange(K)
    diag = tables["pair_idx"][kk, kk]
    pairs = range(tables["pd"].size)

    if mode == "coherent":
        def stat(totals, count):
            meanx, varx, e2x, rq, norme = _pair_moments(tables, totals, count)
            sm = np.einsum("kl,kl->k", root_mu, meanx[diag])
            num = (rho_d ** 2) * dpc.p_d * np.abs(sm[:, None]) ** 2
            base = np.einsum("il,ikl->ki", dpc.mu, rq)         # (K, K)
            pair = np.broadcast_to(base[:, :, None], (K, K, n_sel)).copy()
            for p in pairs:
                k, i = tables["pd"][p], tables["po"][p]
                mw = root_mu[i] @ meanx[p]
                vw = dpc.mu[i] @ varx[p]
                pair[k, i] = rho_d[k] ** 2 * (np.abs(mw) ** 2 + vw) \
                    + rho_bar_d[k] ** 2 * base[k, i]
            second = dpc.p_d * pair.sum(axis=1)                # (K, n)
            return num / (second - num + stats.sigma2)
        sinr, se = _jackknife(stat, arrays, sizes)
        totals = {k: v.sum(0) for k, v in arrays.items()}
        _, _, _, _, norme = _pair_moments(tables, totals, float(trials))
        extras = {"ap_power": np.einsum("il,il->l", dpc.mu, norme)}
    else:
        def parts(totals, count):
            meanx, varx, e2x, rq, norme = _pair_moments(tables, totals, count)
            s_full = (rho_d ** 2)[:, None, :] * dpc.p_d * dpc.mu[kk, :, None] \
                * np.abs(meanx[diag][:, :, None]) ** 2         # (K, L, n)
            m2 = np.broadcast_to(rq.transpose(1, 0, 2)[:, :, :, None],
                                 (K, K, L, n_sel)).copy()      # E|hhat_il^H h_k[n]|^2
            for p in pairs:
                k, i = tables["pd"][p], tables["po"][p]
                m2[k, i] = rho_d[k, None, :] ** 2 * e2x[p][:, None] \
                    + rho_bar_d[k, None, :] ** 2 * rq[i, k][:, None]
            t_full = dpc.p_d * np.einsum("il,kiln->kn", dpc.mu, m2) + stats.sigma2
            return s_full, t_full, norme

        def stat(totals, count):
            s_full, t_full, _ = parts(totals, count)
            s_tot = s_full.sum(axis=1)
            return s_tot / (t_full - s_tot)
        sinr, se = _jackknife(stat, arrays, sizes)
        totals = {k: v.sum(0) for k, v in arrays.items()}
        s_full, t_full, norme = parts(totals, float(trials))
        s_cum = np.cumsum(s_full, axis=1)                      # (K, L, n)
        prev = np.concatenate([np.zeros((K, 1, n_sel)), s_cum[:, :-1]], axis=1)
        zeta = s_full / (t_full[:, None, :] - s_cum)
        extras = {"ap_power": np.einsum("il,il->l", dpc.mu, norme),
                  "zeta": zeta, "zeta_prev_cum": prev}
    return OracleResult(sinr=sinr, stderr=se, instants=instants, trials=trials,
                        extras=extras)


def smallcell_oracle(scenario: Scenario, stats: EstimationStatistics,
                     pilots: PilotAssignment, profile: AgingProfile,
                     frame: FrameConfig, pc: UplinkPowerControl,
                     instants, trials: int, seed=0, block: int = 200,
                     candidate_aps=None) -> OracleResult:
    """Estimate-conditioned small-cell rate by averaging over estimate draws.

    Returns per-instant spectral efficiencies, shape (K, C, n_sel), in
    OracleResult.extras["se_inst"] with the candidate AP list; sinr holds
    the equivalent per-instant SINR at the best candidate.
    """
    dims = scenario.dims
    K, L = dims.K, dims.L
    instants = _check_instants(frame, instants)
    n_sel = instants.size
    if candidate_aps is None or candidate_aps >= L:
        cand = np.broadcast_to(np.arange(L), (K, L)).copy()
    else:
        cand = np.argsort(-scenario.lsf.beta, axis=1)[:, :candidate_aps]
    sizes = _blocks(trials, block)

    per_block = []
    for b, nb in enumerate(sizes):
        rng = stream(seed, b)
        _, h_hat = sample_estimates(scenario, pilots, profile, frame, stats, rng, nb)
        cross2, quad0, quadq = _smallcell_conditional_moments(h_hat, scenario, stats, pc, cand)
        mean_log = _smallcell_mc_perinstant(cross2, quad0, quadq, profile, frame, pc, instants)
        per_block.append(mean_log * nb)
    arrays = {"logs": np.stack(per_block)}

    def stat(totals, count):
        return totals["logs"] / count

    se_inst, se_err = _jackknife(stat, arrays, sizes)
    pair_se = se_inst.sum(axis=2)
    best = pair_se.argmax(axis=1)
    sinr = 2.0 ** se_inst[np.arange(K), best] - 1.0
    return OracleResult(sinr=sinr, stderr=se_err[np.arange(K), best],
                        instants=instants, trials=trials,
                        extras={"se_inst": se_inst, "se_inst_stderr": se_err,
                                "candidates": cand,
                                "serving_ap": cand[np.arange(K), best]})


def smallcell_oracle_n1(scenario: Scenario, stats: EstimationStatistics,
                        pilots: PilotAssignment, profile: AgingProfile,
                        frame: FrameConfig, pc: UplinkPowerControl,
                        instants, trials: int, seed=0,
                        block: int = 256) -> OracleResult:
    """Single-antenna small-cell oracle conditioned on the local estimate only.

    Per draw, pilot-sharing interferers enter through their sampled
    (collinear) estimates; everything else - own estimation error, sharers'
    residual fluctuations, non-sharers' channels, noise - is pooled into an
    empirically estimated constant conditional variance.  This mirrors the
    conditioning of the closed-form single-antenna rate, term for term, with
    no reliance on its algebra.  As in the other oracles the aging
    innovations are averaged out exactly (their variance per link is the
    channel gain, by definition), so only anchor/estimate draws remain.
    The pilot phase is simulated literally, with one scrambled Sobol net
    per (pilot instant, AP) cell over that cell's anchor, pilot-lag
    innovation, and noise coordinates; every accumulated statistic lives
    inside a single cell, so the stratification applies to it directly.
    """
    dims = scenario.dims
    K, L, N = dims.K, dims.L, dims.N
    if N != 1:
        raise ValueError("this oracle is specific to single-antenna APs")
    instants = _check_instants(frame, instants)
    lags = instants - frame.lam
    n_sel = instants.size
    sizes = _blocks(trials, block)
    rho_d = profile.rho_table[:, lags]
    rho_bar_d = profile.rho_bar_table[:, lags]
    eta_p = pc.p_u * pc.eta
    partners = [pilots.sharers(k)[pilots.sharers(k) != k] for k in range(K)]
    same_pilot = (pilots.t[:, None] == pilots.t[None, :]).astype(float)  # (K, K)
    beta = scenario.lsf.beta
    root_beta = np.sqrt(beta)
    amp = np.sqrt(pilots.p_pilot)
    rho_p = stats.rho_pilot
    rho_bar_p = profile.rho_bar_table[np.arange(K), frame.lam - pilots.t]
    est = stats.estimator[:, :, 0, 0]                          # (K, L)

    abs_hat2, sharer, oe2_blocks = [], [], []
    for b, nb in enumerate(sizes):
        rng = stream(seed, b)
        h_anchor = np.empty((nb, K, L), dtype=complex)
        h_hat = np.empty((nb, K, L), dtype=complex)
        for t in range(1, pilots.tau_p + 1):
            members = np.nonzero(pilots.t == t)[0]
            if members.size == 0:
                continue
            m = members.size
            white = _qmc_complex_normal(rng, nb, (L, 2 * m + 1))
            anch = root_beta[members].T[None] * white[..., :m]     # (nb, L, m)
            innov = root_beta[members].T[None] * white[..., m:2 * m]
            noise = np.sqrt(stats.sigma2) * white[..., 2 * m]
            h_pil = rho_p[members] * anch + rho_bar_p[members] * innov
            z = np.einsum("j,tlj->tl", amp[members], h_pil) + noise
            h_anchor[:, members] = anch.transpose(0, 2, 1)
            h_hat[:, members] = est[members][None] * z[:, None, :]
        a2 = np.abs(h_hat) ** 2
        sh = np.zeros((nb, K, L, n_sel))
        for k in range(K):
            oth = partners[k]
            if oth.size:
                sh[:, k] = np.einsum("ij,til->tlj", eta_p[oth, None] * rho_d[oth] ** 2,
                                     a2[:, oth])
        abs_hat2.append(a2)
        sharer.append(sh)
        oe2_blocks.append((np.abs(h_anchor - h_hat) ** 2).sum(0))
    arrays = {"own_err2": np.stack(oe2_blocks)}
    abs_hat2 = np.concatenate(abs_hat2)                        # (T, K, L)
    sharer = np.concatenate(sharer)                            # (T, K, L, n)
    bounds = np.cumsum([0] + sizes)
    # non-sharers' channels are independent of the conditioning estimate, so
    # they contribute their full power beta exactly (rho^2 + rhobar^2 = 1)
    floor_const = np.einsum("ki,i,il->kl", 1.0 - same_pilot, eta_p, beta)

    def stat_with_draws(totals, count, keep):
        # own estimation error and sharers' residual fluctuation age like
        # (rho^2 err + rhobar^2 beta); the error part stays empirical
        tbl_err = eta_p[:, None, None] * (
            (rho_d ** 2)[:, None, :] * (totals["own_err2"] / count)[:, :, None]
            + (rho_bar_d ** 2)[:, None, :] * beta[:, :, None])
        d_hat = np.einsum("ki,iln->kln", same_pilot, tbl_err) \
            + floor_const[:, :, None] + stats.sigma2
        num = (rho_d ** 2)[None, :, None, :] * eta_p[None, :, None, None] \
            * abs_hat2[keep][..., None]
        logs = np.log2(1.0 + num / (sharer[keep] + d_hat[None]))
        return logs.mean(axis=0)

    all_keep = np.ones(len(abs_hat2), dtype=bool)
    grand = {k: v.sum(0) for k, v in arrays.items()}
    full = stat_with_draws(grand, float(trials), all_keep)
    nb = len(sizes)
    if nb >= 2:
        vals = []
        for b in range(nb):
            keep = all_keep.copy()
            keep[bounds[b]:bounds[b + 1]] = False
            vals.append(stat_with_draws(
                {k: grand[k] - arrays[k][b] for k in arrays},
                float(trials - sizes[b]), keep))
        vals = np.stack(vals)
        mean = vals.mean(axis=0)
        se_err = np.sqrt((nb - 1) / nb * ((vals - mean) ** 2).sum(axis=0))
    else:
        se_err = np.full_like(full, np.nan)

    pair_se = full.sum(axis=2)
    best = pair_se.argmax(axis=1)
    return OracleResult(sinr=2.0 ** full[np.arange(K), best] - 1.0,
                        stderr=se_err[np.arange(K), best],
                        instants=instants, trials=trials,
                        extras={"se_inst": full, "se_inst_stderr": se_err,
                                "mean_sharer": sharer.mean(axis=0),
                                "mean_abs_hat2": abs_hat2.mean(axis=0),
                                "serving_ap": best})


def sample_trajectory(scenario: Scenario, profile: AgingProfile,
                      frame: FrameConfig, rng: np.random.Generator,
                      instants, trials: int, anchor: str = "anchor"):
    """Channel realizations at an anchor and the requested instants.

    Each instant is tied to the anchor channel through its own independent
    innovation, weighted by rho over the corresponding lag; this is the
    aging structure the rate analysis relies on (instants are pairwise
    correlated only through the anchor).  anchor="anchor" uses the
    estimation instant lam; anchor="zero" uses the block start, which makes
    the lag-n correlation with the anchor directly inspectable.
    Returns (h_anchor, h_n) with h_n shaped (trials, n_sel, K, L, N).
    """
    dims = scenario.dims
    K, L, N = dims.K, dims.L, dims.N
    instants = np.asarray(instants, dtype=int)
    if anchor == "anchor":
        instants = _check_instants(frame, instants)
        ref = frame.lam
    elif anchor == "zero":
        if np.any(instants < 0) or np.any(instants > frame.tau_c):
            raise ValueError("instants must lie in 0..tau_c")
        ref = 0
    else:
        raise ValueError(f"unknown anchoring mode: {anchor!r}")
    fac = cov_factor(scenario.correlation.R)
    h_anchor = np.einsum("klnm,tklm->tkln", fac, complex_normal(rng, (trials, K, L, N)))
    h_n = np.empty((trials, instants.size, K, L, N), dtype=complex)
    for j, n in enumerate(instants):
        lag = abs(n - ref)
        u = np.einsum("klnm,tklm->tkln", fac, complex_normal(rng, (trials, K, L, N)))
        h_n[:, j] = profile.rho_table[None, :, lag, None, None] * h_anchor \
            + profile.rho_bar_table[None, :, lag, None, None] * u
    return h_anchor, h_n
