"""Unitary B1 ansatz for two excited states: how close does the best
(theta_1, sigma_1) get to the unconstrained first-order solution?"""
import argparse

import numpy as np

from msfactor import mstransform, perturb
from msfactor.corpus import random_chi


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seed", type=int, default=8)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--d", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=5.0)
    args = p.parse_args()
    rng = np.random.default_rng(args.seed)

    print(" n_a  theta    sigma     theta_1   sigma_1   ansatz_res  unconstrained")
    for _ in range(args.count):
        n_a = int(rng.integers(2, 6))
        closed = mstransform.nb2_closed_form(random_chi(rng, n_a, 2))
        res = perturb.nb2_b1(closed, [args.d, -args.d], args.delta)
        print(
            f"{n_a:4d}  {closed.theta:+.4f}  {closed.sigma:+.4f}  {res.theta_1:+.4f}  {res.sigma_1:+.4f}"
            f"   {res.residual:.2e}    {res.unconstrained_residual:.2e}"
        )


if __name__ == "__main__":
    main()
