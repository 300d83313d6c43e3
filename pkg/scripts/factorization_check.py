"""Factorize the seeded corpus and compare every assembled propagator with
brute-force integration of the full Schrodinger equation."""
import argparse

import numpy as np

from msfactor import assemble, mstransform, oracle
from msfactor.corpus import WINDOW, factorization_corpus
from msfactor.linalg import fro


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--tol", type=float, default=1e-9)
    args = p.parse_args()

    print("n_a n_b n_dark  pattern_res   |U_ms - U_oracle|  oracle_steps")
    for spec in factorization_corpus(args.seed, args.count):
        dec = mstransform.decompose(spec.chi)
        u = assemble.ms_assembled(spec, *WINDOW, dec=dec).matrix
        rep = oracle.integrate_full(spec, *WINDOW, tol=args.tol)
        print(
            f"{spec.n_a:3d} {spec.n_b:3d} {dec.n_dark:6d}  {mstransform.pattern_residual(dec):.3e}"
            f"   {fro(u - rep.propagator.matrix):.3e}          {rep.steps}"
        )
    print("lambdas of the last system:", np.round(dec.lambdas, 6))


if __name__ == "__main__":
    main()
