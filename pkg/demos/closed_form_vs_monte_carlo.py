"""Closed-form effective SINR against brute-force Monte Carlo, one drop.

Every deliverable expression in the library has a sampling estimator next to
it. This script draws one small network and compares the two routes at an
early, a middle, and a late data instant, for both uplink receivers and both
downlink transmission modes.
"""

import numpy as np

from cfmimo import (FrameConfig, SystemDims, aging_profile, assign_pilots,
                    downlink_oracle, downlink_power_control,
                    downlink_sinr_coherent, downlink_sinr_noncoherent,
                    estimation_stats, full_power, generate_scenario,
                    lsfd_weights, mf_weights, uplink_oracle, uplink_sinr_cf)

L, K, N = 10, 4, 2
AREA_SIDE = 1000.0       # m
FRAME = FrameConfig(tau_c=50, tau_p=4)
F_D_TS = 0.002
SIGMA2 = 2.5118864315095823e-13  # W
P_UL, P_DL = 0.1, 0.2    # W
INSTANTS = [5, 15, 45]
TRIALS = 10_000
SEED = 4


def compare(name, closed, oracle):
    idx = [list(closed.instants).index(n) for n in INSTANTS]
    cf = closed.sinr[:, idx]
    worst = 0.0
    print(f"\n{name}: closed form | sampled (+- stderr)")
    for k in range(K):
        cells = []
        for j, n in enumerate(INSTANTS):
            rel = abs(cf[k, j] / oracle.sinr[k, j] - 1.0)
            worst = max(worst, rel)
            cells.append(f"n={n}: {cf[k, j]:7.3f} | {oracle.sinr[k, j]:7.3f} "
                         f"(+-{oracle.stderr[k, j]:.3f})")
        print(f"  UE {k}:  " + "   ".join(cells))
    print(f"  worst relative gap: {worst * 100:.2f}%")
    return worst


def main():
    scn = generate_scenario(SystemDims(L, K, N), AREA_SIDE, SEED)
    profile = aging_profile(FRAME, F_D_TS, k=K)
    pilots = assign_pilots(K, FRAME.tau_p, SEED, 0.1)
    stats = estimation_stats(scn, pilots, profile, FRAME, SIGMA2)
    pc = full_power(K, P_UL)

    worst = 0.0
    w_lsfd, _ = lsfd_weights(stats, pilots, profile, FRAME, pc)
    idx = [list(FRAME.data_instants).index(n) for n in INSTANTS]
    for name, w, w_sel in [
            ("uplink, statistics-optimal weights", w_lsfd, w_lsfd[:, idx, :]),
            ("uplink, equal weights", mf_weights(L), mf_weights(L))]:
        closed = uplink_sinr_cf(stats, pilots, profile, FRAME, pc, w)
        orc = uplink_oracle(scn, stats, pilots, profile, FRAME, pc, w_sel,
                            INSTANTS, TRIALS, seed=SEED)
        worst = max(worst, compare(name, closed, orc))

    dpc = downlink_power_control(stats, scn.lsf.beta, "full", P_DL)
    for name, fn, mode in [("downlink, coherent", downlink_sinr_coherent, "coherent"),
                           ("downlink, non-coherent", downlink_sinr_noncoherent,
                            "noncoherent")]:
        closed = fn(stats, pilots, profile, FRAME, dpc)
        orc = downlink_oracle(scn, stats, pilots, profile, FRAME, dpc,
                              INSTANTS, TRIALS, seed=SEED, mode=mode)
        worst = max(worst, compare(name, closed, orc))

    print(f"\nworst gap over all bounds, users, instants: {worst * 100:.2f}% "
          f"at {TRIALS} trials")


if __name__ == "__main__":
    main()
