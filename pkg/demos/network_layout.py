"""One random network drop: geometry, distance attenuation, shadowing structure.

Access points and user terminals are placed uniformly in a square with
wrap-around distances. Large-scale fading combines a three-slope pathloss
with correlated log-normal shadowing whose correlation decays with the
distance between terminals.
"""

import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from cfmimo import SystemDims, generate_drop, pathloss_db, shadowing_covariance

AREA_SIDE = 1000.0              # m
DIMS = SystemDims(L=100, K=20, N=2)
SEED = 7


def main():
    geo, lsf = generate_drop(DIMS, AREA_SIDE, SEED)

    # pathloss at reference distances, all three slope regions
    print("three-slope pathloss:")
    for d in [5.0, 20.0, 49.0, 51.0, 200.0, 700.0]:
        print(f"  d = {d:6.1f} m   PL = {pathloss_db(d):8.2f} dB")

    # shadowing: 8 dB marginal std, correlation split between both link ends
    cov, pairs = shadowing_covariance(geo)
    index = {p: i for i, p in enumerate(pairs)}
    print(f"\nshadowing marginal variance: {np.diag(cov).mean():.1f} dB^2 "
          "(64 = 8 dB std)")
    a, b = index[pairs[0]], index[(pairs[0][0], (pairs[0][1] + 1) % DIMS.L)]
    print(f"same UE, two APs {geo.ap_dist[pairs[0][1], (pairs[0][1] + 1) % DIMS.L]:.0f} m "
          f"apart: {cov[a, b]:.2f} dB^2")

    close = np.unravel_index(np.argmin(geo.ue_dist + 1e9 * np.eye(DIMS.K)),
                             geo.ue_dist.shape)
    if (close[0], 0) in index and (close[1], 0) in index:
        c = cov[index[(close[0], 0)], index[(close[1], 0)]]
        print(f"closest UE pair ({geo.ue_dist[close]:.0f} m apart), same AP: "
              f"{c:.2f} dB^2")

    # a UE is strongly coupled to a handful of nearby APs
    order = np.sort(lsf.beta, axis=1)[:, ::-1]
    share = order[:, :5].sum(axis=1) / lsf.beta.sum(axis=1)
    print(f"\nfraction of total channel gain from the 5 strongest APs: "
          f"median {np.median(share):.2f}")

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.5, 4.2))
    ax1.scatter(geo.ap_positions[:, 0], geo.ap_positions[:, 1], marker="^",
                s=30, label="AP")
    ax1.scatter(geo.ue_positions[:, 0], geo.ue_positions[:, 1], marker="o",
                s=18, label="UE")
    ax1.set_xlabel("x [m]")
    ax1.set_ylabel("y [m]")
    ax1.set_title("one drop")
    ax1.legend()

    d = np.geomspace(1.0, 1000.0, 200)
    ax2.semilogx(d, pathloss_db(d))
    ax2.set_xlabel("distance [m]")
    ax2.set_ylabel("pathloss [dB]")
    ax2.set_title("three-slope attenuation")
    ax2.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig("network_layout.png", dpi=120)
    print("\nwrote network_layout.png")


if __name__ == "__main__":
    main()
