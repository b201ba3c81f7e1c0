"""Temporal channel correlation under the Jakes model and the frame design rule.

The correlation between the channel at the pilot instant and at a later data
instant is J0(2 pi f_D Ts n). Once the argument crosses the first Bessel zero
the channel decorrelates, so a resource block should end before that point.
The design rule places tau_c at the first zero for the largest Doppler shift
the system must support.
"""

import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from cfmimo import besselj0, besselj0_first_zero, design_tau_c, doppler_from_speed

DOPPLERS = [0.001, 0.002, 0.004]    # normalized Doppler shifts f_D * Ts
T_S = 0.01e-3                       # s, length of one time instant
F_C = 2e9                           # Hz carrier


def main():
    print("frame length rule: tau_c = floor(j_0 / (2 pi f_D Ts)) with "
          f"j_0 = {besselj0_first_zero():.6f}")
    for f in DOPPLERS:
        v = f / doppler_from_speed(1.0, F_C, T_S)  # km/h at 2 GHz
        print(f"  f_D Ts = {f:.3f}  (~{v:5.1f} km/h)   tau_c = {design_tau_c(f):4d}")

    n = np.arange(0, 500)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for f in DOPPLERS:
        rho_n = besselj0(2.0 * np.pi * f * n)
        ax.plot(n, rho_n, label=f"f_D Ts = {f}")
        ax.axvline(design_tau_c(f), color=ax.lines[-1].get_color(),
                   linestyle=":", alpha=0.7)
    ax.axhline(0.0, color="k", linewidth=0.8)
    ax.set_xlabel("instants since pilot, n")
    ax.set_ylabel("correlation rho[n]")
    ax.set_title("dotted lines: designed resource-block length")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig("aging_correlation.png", dpi=120)
    print("\nwrote aging_correlation.png")


if __name__ == "__main__":
    main()
