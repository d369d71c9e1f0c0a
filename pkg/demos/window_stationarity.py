"""The cavity plus its two most recent chain partners settle into a fixed state.

Builds the limiting window state, checks that one more interaction
(followed by dropping the oldest mode and undoing one free period) leaves
it unchanged, and shows finite windows approaching it geometrically.
"""
import math

import numpy as np

from cavitychain import ModelParams, ModeState, propagator_blocks
from cavitychain.sampling import random_label
from cavitychain.window import advance_rotate_drop, window_state, window_state_finite


def main():
    p = ModelParams(1.0, 1.0, 0.5, 1.0, 0.2, 0.05).validate()
    rho1 = ModeState.gibbs(1.0)
    rho0 = ModeState.displaced_gibbs(0.8, 0.7)
    rng = np.random.default_rng(0)
    Z = np.stack([random_label(rng, 3) for _ in range(32)], axis=1)

    limit = window_state(2, p, rho1)
    moved = advance_rotate_drop(limit, rho1, p)
    print(f"invariance defect: {np.max(np.abs(moved(Z) - limit(Z))):.2e}")

    q = abs(propagator_blocks(p, p.tau).gz)
    print(f"|gz| = {q:.6f}")
    print(f"{'k':>4} {'error':>12} {'error / |gz|^k':>16}")
    ref = limit(Z)
    for k in (0, 5, 10, 20, 30, 40):
        err = np.max(np.abs(window_state_finite(2, k, p, rho0, rho1)(Z) - ref))
        print(f"{k:4d} {err:12.3e} {err / q ** k:16.6f}")

    cov = window_state(2, p, rho1, output="covariance")
    occ = np.real(np.diag(cov.moments()))
    # both chain modes met the same stationary cavity, so their occupations agree
    print("\nwindow occupations (cavity, chain 1, chain 2):", np.round(occ, 6))
    print(f"chain occupation before interacting: {1 / math.expm1(1.0):.6f}")


if __name__ == "__main__":
    main()
