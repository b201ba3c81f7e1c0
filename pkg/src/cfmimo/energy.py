"""Total power consumption and energy efficiency of the cell-free network.

Energy efficiency divides the half-duplex sum throughput (uplink and
downlink SE averaged per UE, scaled by bandwidth) by the total consumed
power: radiated power corrected for amplifier efficiency and weighted by
the uplink/downlink duty cycle, plus a circuit part (per-UE and per-antenna
electronics) and a fronthaul part with a fixed term and a traffic-
proportional term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .aging import FrameConfig
from .results import SEResult


@dataclass
class PowerModel:
    """Consumption parameters; defaults follow common hardware figures.

    The transmit-power terms mirror formulas stated for normalized (SNR-like)
    transmit powers, i.e. they multiply p * sigma2.  With powers configured
    in watts set normalized_snr=True to divide them by sigma2 first,
    recovering plain p / amplifier-efficiency radiated terms.
    """

    bandwidth_hz: float = 20e6
    amp_eff_ue: float = 0.4         # uplink power-amplifier efficiency
    amp_eff_ap: float = 0.4         # downlink power-amplifier efficiency
    p_circuit_ue: float = 0.1       # watts per UE
    p_circuit_ap_antenna: float = 0.2   # watts per AP antenna
    p_fronthaul_fixed: float = 0.825    # watts per AP
    p_fronthaul_traffic: float = 0.25e-9  # watts per bit/s of backhauled rate
    normalized_snr: bool = False


@dataclass
class EnergyResult:
    p_tx_ul: float
    p_tx_dl: float
    p_cp: float
    p_total: float
    se_sum: float       # bits/s/Hz, uplink/downlink average summed over UEs
    ee: float           # bits/joule; EE * p_total = bandwidth * se_sum


def sum_se(se_ul: SEResult, se_dl: SEResult) -> float:
    """Half-duplex sum SE: per-UE average of the two directions, summed."""
    if se_ul.se.shape != se_dl.se.shape:
        raise ValueError("uplink and downlink results cover different UE sets")
    return float(0.5 * (se_ul.se + se_dl.se).sum())


def total_power(model: PowerModel, frame: FrameConfig, dims,
                p_u: float, eta: np.ndarray, p_d: float, mu: np.ndarray,
                tr_q: np.ndarray, se_sum: float, sigma2: float) -> EnergyResult:
    """Assemble the consumption budget for one drop.

    dims: SystemDims; eta: (K,) uplink coefficients; mu: (K, L) downlink
    shares; tr_q: (K, L) estimate-power traces (sets the realized downlink
    radiated power).
    """
    if eta.shape[0] != dims.K or mu.shape != tr_q.shape:
        raise ValueError("power-control arrays do not match the network size")
    snr_scale = 1.0 if model.normalized_snr else sigma2
    p_tx_ul = float(np.sum(p_u * snr_scale * eta) / model.amp_eff_ue)
    radiated = np.einsum("kl,kl->l", mu, tr_q)         # per-AP, units of p_d
    p_tx_dl = float(p_d * snr_scale * radiated.sum() / model.amp_eff_ap)

    traffic = model.bandwidth_hz * se_sum * model.p_fronthaul_traffic
    p_cp = dims.K * model.p_circuit_ue \
        + dims.L * dims.N * model.p_circuit_ap_antenna \
        + dims.L * (model.p_fronthaul_fixed + traffic)

    ul_frac = (frame.tau_c + frame.tau_p) / (2.0 * frame.tau_c)
    dl_frac = (frame.tau_c - frame.tau_p) / (2.0 * frame.tau_c)
    p_total = ul_frac * p_tx_ul + dl_frac * p_tx_dl + p_cp
    ee = model.bandwidth_hz * se_sum / p_total
    return EnergyResult(p_tx_ul=p_tx_ul, p_tx_dl=p_tx_dl, p_cp=p_cp,
                        p_total=p_total, se_sum=se_sum, ee=ee)


def aggregate_energy(results: list) -> EnergyResult:
    """Average an EnergyResult list over drops.

    Powers and SE are averaged; EE is recomputed from the averages so the
    closure EE * P_total = B * SE_sum continues to hold for the aggregate.
    """
    if not results:
        raise ValueError("nothing to aggregate")
    p_tx_ul = float(np.mean([r.p_tx_ul for r in results]))
    p_tx_dl = float(np.mean([r.p_tx_dl for r in results]))
    p_cp = float(np.mean([r.p_cp for r in results]))
    p_total = float(np.mean([r.p_total for r in results]))
    se_sum = float(np.mean([r.se_sum for r in results]))
    ee = float(np.mean([r.ee * r.p_total for r in results]) / p_total)
    return EnergyResult(p_tx_ul=p_tx_ul, p_tx_dl=p_tx_dl, p_cp=p_cp,
                        p_total=p_total, se_sum=se_sum, ee=ee)


def ee_vs_l_sweep(config, l_values, drops: int | None = None):
    """Energy efficiency as a function of the number of APs.

    Runs the configured uplink (LSFD) and downlink (coherent) schemes for
    each L, averaging one EnergyResult per L over the drops.  Returns a
    list of (L, EnergyResult) pairs.
    """
    from .harness import run_energy_curve   # local import: harness uses this module
    return run_energy_curve(config, l_values, drops)
