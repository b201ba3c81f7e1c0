"""How spatial correlation and pilot reuse shape channel estimation quality.

Quality is measured per link as tr(Q) / tr(R), the fraction of the channel
power captured by the linear estimate. Narrow angular spread concentrates
the channel in few directions, which the estimator exploits. Pilot reuse
injects contamination that the estimator cannot separate, and aging during
the pilot phase costs a little even with private pilots.
"""

import numpy as np

from cfmimo import (FrameConfig, SystemDims, aging_profile, assign_pilots,
                    estimation_stats, generate_scenario)

L, K, N = 16, 8, 4
AREA_SIDE = 1000.0       # m
SIGMA2 = 2.5118864315095823e-13  # W
SEED = 11


def quality(asd_deg, tau_p, f_d_ts):
    scn = generate_scenario(SystemDims(L, K, N), AREA_SIDE, SEED,
                            asd_deg=asd_deg)
    frame = FrameConfig(tau_c=200, tau_p=tau_p)
    profile = aging_profile(frame, f_d_ts, k=K)
    pilots = assign_pilots(K, tau_p, SEED, 0.1)
    stats = estimation_stats(scn, pilots, profile, frame, SIGMA2)
    tr_r = np.einsum("klnn->kl", scn.correlation.R).real
    return float(np.mean(stats.tr_q / tr_r))


def main():
    asds = [10.0, 30.0, 50.0, None]
    names = ["ASD 10", "ASD 30", "ASD 50", "uncorr"]

    print("mean tr(Q)/tr(R) over links, static channel (f_D Ts = 0):")
    print("          " + "".join(f"{n:>9s}" for n in names))
    for tau_p, label in [(K, "private"), (K // 2, "reuse x2")]:
        row = [quality(a, tau_p, 0.0) for a in asds]
        print(f"{label:>9s} " + "".join(f"{v:9.3f}" for v in row))

    print("\nsame with aging during the pilot phase (f_D Ts = 0.004):")
    for tau_p, label in [(K, "private"), (K // 2, "reuse x2")]:
        row = [quality(a, tau_p, 0.004) for a in asds]
        print(f"{label:>9s} " + "".join(f"{v:9.3f}" for v in row))

    print("\nnarrower spread -> better estimates; reuse costs a few percent "
          "of captured power,\nand aging across a short pilot phase costs "
          "almost nothing")


if __name__ == "__main__":
    main()
