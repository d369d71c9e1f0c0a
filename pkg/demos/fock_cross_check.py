"""Compare the closed-form covariance with a brute-force master-equation run.

The truncated Fock-space integration knows nothing about Gaussian states;
agreement of second moments and characteristic functions across cutoffs
is an independent check of the exact solution.
"""
import argparse

from cavitychain import ModelParams
from cavitychain.fock import oracle_check


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=1, choices=(1, 2))
    ap.add_argument("--beta0", type=float, default=2.0)
    ap.add_argument("--beta", type=float, default=1.8)
    args = ap.parse_args()

    p = ModelParams(1.0, 1.2, 0.6, 1.0, 0.3, 0.03).validate()
    print(f"{'d':>3} {'moment error':>14} {'char fn error':>14} {'min eigenvalue':>15} {'seconds':>8}")
    for d in (6, 8, 10, 12):
        rep = oracle_check(p, args.steps, d, args.beta0, args.beta, check_tail=False)
        print(f"{d:3d} {rep.moment_error:14.3e} {rep.char_fn_error:14.3e} {rep.min_eigenvalue:15.2e} {rep.seconds:8.2f}")


if __name__ == "__main__":
    main()
