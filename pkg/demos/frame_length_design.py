"""Sum spectral efficiency against Doppler for different resource-block lengths.

A long block amortizes the pilot overhead but keeps transmitting on stale
channel estimates, so at high mobility the late instants contribute almost
nothing. Short blocks waste a larger fraction of instants on pilots. Picking
tau_c from the first Bessel zero at the largest supported Doppler balances
the two effects and keeps the sum SE nearly flat over the mobility range.
"""

import numpy as np

from cfmimo import (FrameConfig, SystemDims, aging_profile, assign_pilots,
                    design_tau_c, downlink_power_control, downlink_sinr_coherent,
                    estimation_stats, full_power, generate_scenario, sum_se,
                    uplink_se_lsfd)

L, K, N = 20, 8, 2
AREA_SIDE = 1000.0          # m
TAU_P = 8
SIGMA2 = 2.5118864315095823e-13   # W (-96 dBm)
P_UL, P_DL, P_PILOT = 0.1, 0.2, 0.1  # W
DOPPLERS = [0.0005, 0.001, 0.002, 0.003, 0.004]
FIXED_LENGTHS = [200, 400, 765]
DROPS = 4


def mean_sum_se(tau_c, f, drops=DROPS):
    frame = FrameConfig(tau_c=tau_c, tau_p=TAU_P)
    profile = aging_profile(frame, f, k=K)
    acc = 0.0
    for d in range(drops):
        scn = generate_scenario(SystemDims(L, K, N), AREA_SIDE, 100 + d)
        pilots = assign_pilots(K, TAU_P, 200 + d, P_PILOT)
        stats = estimation_stats(scn, pilots, profile, frame, SIGMA2)
        pc = full_power(K, P_UL)
        ul = uplink_se_lsfd(stats, pilots, profile, frame, pc)
        dpc = downlink_power_control(stats, scn.lsf.beta, "full", P_DL)
        dl = downlink_sinr_coherent(stats, pilots, profile, frame, dpc)
        acc += sum_se(ul, dl)
    return acc / drops


def main():
    designed_len = design_tau_c(max(DOPPLERS))
    print(f"designed length from the largest supported Doppler "
          f"{max(DOPPLERS)}: tau_c = {designed_len}\n")
    print("f_D Ts   tau_c=" + f"{designed_len:<6d}"
          + "".join(f"tau_c={t:<6d}" for t in FIXED_LENGTHS))
    for f in DOPPLERS:
        vals = [mean_sum_se(t, f) for t in [designed_len] + FIXED_LENGTHS]
        print(f"{f:.4f}  " + "".join(f"{v:8.2f}    " for v in vals))
    print("\nsum SE in bits/s/Hz, averaged over drops. The designed length "
          "gives up a little\nat low Doppler but never collapses; the long "
          "blocks fall off past their first zero")


if __name__ == "__main__":
    main()
