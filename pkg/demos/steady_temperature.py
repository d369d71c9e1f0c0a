"""How the cavity's long-time temperature depends on the coupling strength.

For a Gibbs chain the steady state is Gibbs with
coth(beta*/2) = (1 - lam) coth(beta_res/2) + lam coth(beta/2); the weight
lam grows from 0 (decoupled) towards 1 as the coupling takes over from the
reservoir.  The script prints lam and beta* across couplings, then follows
the cavity occupation in time for one coupling.
"""
import argparse
import math

import numpy as np

from cavitychain import ModelParams, ModeState, cavity_occupation, thermo_summary


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--beta", type=float, default=1.0, help="chain inverse temperature")
    ap.add_argument("--sigma-minus", type=float, default=0.2)
    ap.add_argument("--sigma-plus", type=float, default=0.05)
    args = ap.parse_args()

    print(f"reservoir beta = {math.log(args.sigma_minus / args.sigma_plus):.4f}, chain beta = {args.beta}")
    print(f"{'eta':>6} {'lambda':>10} {'beta*':>10}")
    for eta in np.linspace(0.0, 1.0, 11):
        p = ModelParams(1.0, 1.0, float(eta), 1.0, args.sigma_minus, args.sigma_plus).validate()
        s = thermo_summary(p, args.beta)
        print(f"{eta:6.2f} {s.lam:10.6f} {s.beta_star:10.6f}")

    p = ModelParams(1.0, 1.0, 0.5, 1.0, args.sigma_minus, args.sigma_plus).validate()
    s = thermo_summary(p, args.beta)
    target = 1.0 / math.expm1(s.beta_star)
    rho0, rho1 = ModeState.vacuum(), ModeState.gibbs(args.beta)
    print(f"\noccupation from the vacuum at eta = 0.5 (steady value {target:.6f})")
    for t in (0.0, 1.0, 2.5, 5.0, 10.0, 20.0, 40.0):
        print(f"  t = {t:5.1f}  <a*a> = {cavity_occupation(t, rho0, rho1, p):.6f}")


if __name__ == "__main__":
    main()
