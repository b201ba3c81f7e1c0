"""Power consumption model and energy-efficiency bookkeeping."""

import numpy as np
import pytest

from cfmimo import (FrameConfig, PowerModel, SEResult, SystemDims,
                    aggregate_energy, sum_se, total_power)

_FRAME = FrameConfig(tau_c=200, tau_p=10)
_DIMS = SystemDims(L=100, K=20, N=2)


def _fixed_args(dims=_DIMS, se_sum=0.0, p_u=0.0, p_d=0.0):
    eta = np.ones(dims.K)
    mu = np.full((dims.K, dims.L), 1.0 / dims.K)
    tr_q = np.ones((dims.K, dims.L))
    return dict(frame=_FRAME, dims=dims, p_u=p_u, eta=eta, p_d=p_d, mu=mu,
                tr_q=tr_q, se_sum=se_sum, sigma2=1e-13)


def test_circuit_power_reference_value():
    """Default hardware figures at L = 100, K = 20, N = 2, zero traffic."""
    res = total_power(PowerModel(), **_fixed_args())
    assert abs(res.p_cp - 124.5) < 1e-9
    assert res.p_total == res.p_cp


def test_traffic_term():
    # 100 APs x 0.25 W/Gbit/s x (20 MHz x 50 bits/s/Hz) = 25 W
    res = total_power(PowerModel(), **_fixed_args(se_sum=50.0))
    assert abs(res.p_cp - (124.5 + 25.0)) < 1e-9


def test_power_linear_in_se_sum():
    model = PowerModel()
    a = total_power(model, **_fixed_args(se_sum=10.0))
    b = total_power(model, **_fixed_args(se_sum=30.0))
    slope = (b.p_total - a.p_total) / 20.0
    want = _DIMS.L * model.bandwidth_hz * model.p_fronthaul_traffic
    assert abs(slope - want) / want < 1e-12


def test_ee_closure():
    """EE * P_total = B * SE_sum by definition."""
    model = PowerModel()
    res = total_power(model, **_fixed_args(se_sum=37.5, p_u=0.1, p_d=0.2))
    assert abs(res.ee * res.p_total - model.bandwidth_hz * res.se_sum) \
        < 1e-6 * model.bandwidth_hz * res.se_sum


def test_transmit_terms_and_duty_cycle():
    """Radiated terms carry the sigma2 scaling and the frame duty weights."""
    model = PowerModel()
    args = _fixed_args(p_u=0.1, p_d=0.2)
    res = total_power(model, **args)
    sigma2 = args["sigma2"]
    want_ul = _DIMS.K * 0.1 * sigma2 / model.amp_eff_ue
    # mu with column sums 100/20 x tr_q = 1 per entry: radiated = K*L/K = L
    want_dl = 0.2 * sigma2 * _DIMS.L / model.amp_eff_ap
    assert abs(res.p_tx_ul - want_ul) / want_ul < 1e-12
    assert abs(res.p_tx_dl - want_dl) / want_dl < 1e-12
    ul_w = (200 + 10) / 400.0
    dl_w = (200 - 10) / 400.0
    want_total = ul_w * want_ul + dl_w * want_dl + res.p_cp
    assert abs(res.p_total - want_total) < 1e-9


def test_normalized_snr_switch():
    """normalized_snr = True drops the sigma2 factor from radiated power."""
    model = PowerModel(normalized_snr=True)
    res = total_power(model, **_fixed_args(p_u=0.1))
    want_ul = _DIMS.K * 0.1 / model.amp_eff_ue
    assert abs(res.p_tx_ul - want_ul) / want_ul < 1e-12


def test_sum_se():
    frame = FrameConfig(tau_c=10, tau_p=2)
    ul = SEResult.from_sinr("a", np.ones((2, 8)), frame)
    dl = SEResult.from_sinr("b", 3.0 * np.ones((2, 8)), frame)
    want = 0.5 * (ul.se + dl.se).sum()
    assert abs(sum_se(ul, dl) - want) < 1e-12
    same = sum_se(ul, ul)
    assert abs(same - ul.se.sum()) < 1e-12


def test_sum_se_mismatched_ues():
    frame = FrameConfig(tau_c=10, tau_p=2)
    ul = SEResult.from_sinr("a", np.ones((2, 8)), frame)
    dl = SEResult.from_sinr("b", np.ones((3, 8)), frame)
    with pytest.raises(ValueError):
        sum_se(ul, dl)


def test_mismatched_shapes_rejected():
    model = PowerModel()
    args = _fixed_args()
    args["eta"] = np.ones(_DIMS.K + 1)
    with pytest.raises(ValueError):
        total_power(model, **args)


def test_aggregate_energy_preserves_closure():
    model = PowerModel()
    drops = [total_power(model, **_fixed_args(se_sum=s, p_u=0.1))
             for s in (10.0, 20.0, 40.0)]
    agg = aggregate_energy(drops)
    assert abs(agg.se_sum - np.mean([10.0, 20.0, 40.0])) < 1e-12
    assert abs(agg.ee * agg.p_total - model.bandwidth_hz * agg.se_sum) \
        < 1e-6 * model.bandwidth_hz * agg.se_sum
    with pytest.raises(ValueError):
        aggregate_energy([])
