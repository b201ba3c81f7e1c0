"""Uplink SE: combining weight optimality, reductions, and power control."""

import numpy as np
import pytest

from cfmimo import (full_power, lsfd_weights, mf_weights, sccpc_cellfree,
                    sccpc_smallcell, smallcell_closed_form_perinstant,
                    smallcell_se, uplink_se_lsfd, uplink_se_mf, uplink_sinr_cf,
                    uplink_sinr_uncorrelated)
from cfmimo.uplink import UplinkPowerControl
from conftest import P_UL, SIGMA2, make_drop, rel_err


def test_lsfd_dominates_mf_everywhere():
    """Statistics-optimal weights beat equal weights per UE and instant."""
    for seed in range(5):
        scn, pilots, profile, frame, stats = make_drop(seed=31 + seed)
        pc = full_power(scn.dims.K, P_UL)
        lsfd = uplink_se_lsfd(stats, pilots, profile, frame, pc)
        mf = uplink_se_mf(stats, pilots, profile, frame, pc)
        assert np.all(lsfd.sinr >= mf.sinr - 1e-12 * np.abs(mf.sinr))
        assert np.all(lsfd.se >= mf.se - 1e-12)


def test_lsfd_lowrank_equals_dense(small_drop):
    scn, pilots, profile, frame, stats = small_drop
    pc = full_power(scn.dims.K, P_UL)
    w_fast, s_fast = lsfd_weights(stats, pilots, profile, frame, pc)
    w_dense, s_dense = lsfd_weights(stats, pilots, profile, frame, pc,
                                    method="dense")
    assert rel_err(s_fast, s_dense) < 1e-9
    # weights themselves agree too (same linear system)
    assert np.max(np.abs(w_fast - w_dense)) < 1e-9 * np.abs(w_dense).max()


def test_lsfd_weights_achieve_their_sinr(small_drop):
    """The quadratic-form shortcut equals the general expression at the
    returned weights."""
    scn, pilots, profile, frame, stats = small_drop
    pc = full_power(scn.dims.K, P_UL)
    weights, sinr = lsfd_weights(stats, pilots, profile, frame, pc)
    via_general = uplink_sinr_cf(stats, pilots, profile, frame, pc, weights)
    assert rel_err(sinr, via_general.sinr) < 1e-9


def test_weight_scale_invariance(small_drop):
    scn, pilots, profile, frame, stats = small_drop
    pc = full_power(scn.dims.K, P_UL)
    w = mf_weights(scn.dims.L)
    a = uplink_sinr_cf(stats, pilots, profile, frame, pc, w)
    b = uplink_sinr_cf(stats, pilots, profile, frame, pc, (0.3 - 1.7j) * w)
    assert rel_err(a.sinr, b.sinr) < 1e-12


def test_single_ap_lsfd_equals_mf():
    scn, pilots, profile, frame, stats = make_drop(L=1, seed=41)
    pc = full_power(scn.dims.K, P_UL)
    lsfd = uplink_se_lsfd(stats, pilots, profile, frame, pc)
    mf = uplink_se_mf(stats, pilots, profile, frame, pc)
    assert rel_err(lsfd.sinr, mf.sinr) < 1e-10


def test_uncorrelated_reduction_matches_general(uncorrelated_drop):
    """gamma/beta form equals the trace form when R = beta I, any aging."""
    scn, pilots, profile, frame, stats = uncorrelated_drop
    pc = full_power(scn.dims.K, P_UL)
    w = mf_weights(scn.dims.L)
    general = uplink_sinr_cf(stats, pilots, profile, frame, pc, w)
    reduced = uplink_sinr_uncorrelated(scn.lsf.beta, stats, pilots, profile,
                                       frame, pc, w)
    assert rel_err(reduced.sinr, general.sinr) < 1e-10


def test_uncorrelated_reduction_rejects_correlated(small_drop):
    scn, pilots, profile, frame, stats = small_drop
    pc = full_power(scn.dims.K, P_UL)
    with pytest.raises(ValueError):
        uplink_sinr_uncorrelated(scn.lsf.beta, stats, pilots, profile, frame,
                                 pc, mf_weights(scn.dims.L))


def test_zero_doppler_instant_independence(static_uncorrelated_drop):
    scn, pilots, profile, frame, stats = static_uncorrelated_drop
    pc = full_power(scn.dims.K, P_UL)
    for res in (uplink_se_lsfd(stats, pilots, profile, frame, pc),
                uplink_se_mf(stats, pilots, profile, frame, pc)):
        spread = res.sinr.max(axis=1) - res.sinr.min(axis=1)
        assert np.max(spread / res.sinr.max(axis=1)) < 1e-10


def test_scalar_case_hand_formula():
    """K = L = N = 1, no aging: SINR = p gamma / (p beta + sigma2)."""
    scn, pilots, profile, frame, stats = make_drop(
        L=1, K=1, N=1, tau_p=1, f_d_ts=0.0, asd_deg=None, seed=3)
    pc = full_power(1, P_UL)
    res = uplink_sinr_cf(stats, pilots, profile, frame, pc, np.ones(1))
    beta = scn.lsf.beta[0, 0]
    gamma = stats.gamma[0, 0]
    want = P_UL * gamma / (P_UL * beta + SIGMA2)
    assert rel_err(res.sinr, np.full_like(res.sinr, want)) < 1e-12


def test_inverse_sinr_affine_in_inverse_rho2():
    """With one shared Doppler and fixed weights, 1/SINR is a straight line
    in 1/rho^2 across instants."""
    scn, pilots, profile, frame, stats = make_drop(f_d_ts=0.01, seed=51)
    pc = full_power(scn.dims.K, P_UL)
    res = uplink_se_mf(stats, pilots, profile, frame, pc)
    lags = frame.data_instants - frame.lam
    kappa = 1.0 / profile.rho_table[:, lags] ** 2          # (K, n)
    inv = 1.0 / res.sinr
    # three instants with distinct rho: endpoints and middle
    j = np.array([0, lags.size // 2, lags.size - 1])
    slope_a = (inv[:, j[1]] - inv[:, j[0]]) / (kappa[:, j[1]] - kappa[:, j[0]])
    slope_b = (inv[:, j[2]] - inv[:, j[0]]) / (kappa[:, j[2]] - kappa[:, j[0]])
    assert np.max(np.abs(slope_a - slope_b) / np.abs(slope_a)) < 1e-9


def test_inverse_sinr_affine_in_inverse_n():
    """Uncorrelated case: 1/SINR is a straight line in 1/N at fixed drop."""
    vals = {}
    for n_ant in (1, 2, 4):
        scn, pilots, profile, frame, stats = make_drop(
            N=n_ant, asd_deg=None, f_d_ts=0.002, seed=61)
        pc = full_power(scn.dims.K, P_UL)
        res = uplink_sinr_uncorrelated(scn.lsf.beta, stats, pilots, profile,
                                       frame, pc, mf_weights(scn.dims.L))
        vals[n_ant] = 1.0 / res.sinr
    s12 = (vals[2] - vals[1]) / (1.0 / 2 - 1.0)
    s14 = (vals[4] - vals[1]) / (1.0 / 4 - 1.0)
    assert np.max(np.abs(s12 - s14) / np.abs(s12)) < 1e-9


def test_sinr_decays_within_design_range():
    """For f > 0 the SINR is weakly decreasing in n before rho's first zero."""
    scn, pilots, profile, frame, stats = make_drop(f_d_ts=0.01, seed=71)
    pc = full_power(scn.dims.K, P_UL)
    for res in (uplink_se_lsfd(stats, pilots, profile, frame, pc),
                uplink_se_mf(stats, pilots, profile, frame, pc)):
        d = np.diff(res.sinr, axis=1)
        assert np.all(d <= 1e-12 * res.sinr[:, :-1])


def test_sccpc_cellfree():
    beta = np.array([[1.0, 1.0], [2.0, 2.0], [0.5, 0.5]])
    pc = sccpc_cellfree(beta, P_UL)
    # totals 2, 4, 1 -> eta = 1/2, 1/4, 1
    assert np.allclose(pc.eta, [0.5, 0.25, 1.0])
    assert pc.eta.max() == 1.0
    sym = sccpc_cellfree(np.ones((4, 3)), P_UL)
    assert np.allclose(sym.eta, 1.0)


def test_sccpc_smallcell():
    beta = np.array([[1.0, 3.0], [2.0, 0.1]])
    serving = np.array([1, 0])                 # gains 3.0 and 2.0
    pc = sccpc_smallcell(beta, serving, P_UL)
    assert np.allclose(pc.eta, [2.0 / 3.0, 1.0])


def test_power_control_validation():
    with pytest.raises(ValueError):
        UplinkPowerControl(eta=np.array([0.5, 1.2]), p_u=P_UL)
    with pytest.raises(ValueError):
        UplinkPowerControl(eta=np.array([-0.1, 0.5]), p_u=P_UL)


def test_weight_shape_validation(small_drop):
    scn, pilots, profile, frame, stats = small_drop
    pc = full_power(scn.dims.K, P_UL)
    with pytest.raises(ValueError):
        uplink_sinr_cf(stats, pilots, profile, frame, pc, np.ones(scn.dims.L + 1))
    with pytest.raises(ValueError):
        uplink_sinr_cf(stats, pilots, profile, frame, pc, np.zeros(scn.dims.L))


def test_se_matches_sinr_accounting(small_drop):
    scn, pilots, profile, frame, stats = small_drop
    pc = full_power(scn.dims.K, P_UL)
    res = uplink_se_mf(stats, pilots, profile, frame, pc)
    want = np.log2(1.0 + res.sinr).sum(axis=1) / frame.tau_c
    assert np.allclose(res.se, want)
    assert res.instants[0] == frame.lam and res.instants[-1] == frame.tau_c


# -- small-cell path -------------------------------------------------------

def test_smallcell_closed_form_vs_monte_carlo():
    """N = 1: the exponential-integral rate equals the draw-averaged rate."""
    scn, pilots, profile, frame, stats = make_drop(
        L=4, K=3, N=1, tau_p=2, f_d_ts=0.005, seed=81)
    pc = full_power(scn.dims.K, P_UL)
    cf = smallcell_se(scn, stats, pilots, profile, frame, pc, mode="closed_form")
    mc = smallcell_se(scn, stats, pilots, profile, frame, pc,
                      mode="monte_carlo", seed=5, est_draws=4000)
    assert np.array_equal(cf.extras["serving_ap"], mc.extras["serving_ap"])
    assert rel_err(mc.se, cf.se) < 0.03


def test_smallcell_private_pilots_single_term():
    """No pilot sharing: the rate reduces to the single scaled-E1 branch and
    the sharing correction vanishes."""
    from cfmimo.special import expe1
    scn, pilots, profile, frame, stats = make_drop(
        L=3, K=2, N=1, tau_p=2, f_d_ts=0.002, seed=91)
    assert all(pilots.sharers(k).size == 1 for k in range(2))
    pc = full_power(2, P_UL)
    se = smallcell_closed_form_perinstant(scn.lsf.beta, stats, pilots, profile,
                                          frame, pc, frame.data_instants)
    # rebuild the single-term value by hand: w = p gamma rho^2 / floor with
    # the floor subtracting only the UE's own explained power (no sharers)
    lags = frame.data_instants - frame.lam
    rho2 = profile.rho_table[:, lags] ** 2                 # (K, n)
    gamma = stats.tr_q                                     # (K, L)
    floor = (P_UL * scn.lsf.beta.sum(axis=0))[None, :, None] \
        - P_UL * gamma[:, :, None] * rho2[:, None, :] + SIGMA2
    w = P_UL * gamma[:, :, None] * rho2[:, None, :] / floor
    want = expe1(1.0 / w) / np.log(2.0)
    assert rel_err(se, want) < 1e-12


def test_smallcell_serving_ap_pinning(small_drop):
    scn, pilots, profile, frame, stats = small_drop
    pc = full_power(scn.dims.K, P_UL)
    pinned = np.zeros(scn.dims.K, dtype=int)
    res = smallcell_se(scn, stats, pilots, profile, frame, pc,
                       mode="monte_carlo", seed=7, est_draws=200,
                       serving_ap=pinned)
    assert np.array_equal(res.extras["serving_ap"], pinned)
    free = smallcell_se(scn, stats, pilots, profile, frame, pc,
                        mode="monte_carlo", seed=7, est_draws=200)
    assert np.all(free.se >= res.se - 1e-9)


def test_smallcell_closed_form_requires_single_antenna(small_drop):
    scn, pilots, profile, frame, stats = small_drop
    pc = full_power(scn.dims.K, P_UL)
    with pytest.raises(ValueError):
        smallcell_se(scn, stats, pilots, profile, frame, pc, mode="closed_form")
