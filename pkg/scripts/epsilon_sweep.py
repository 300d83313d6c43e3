"""Error of the zeroth-order and first-order (Dyson) MS propagators against
the oracle as the detuning spread eps grows, with fitted log-log slopes."""
import argparse

import numpy as np

from msfactor import mstransform, oracle, perturb
from msfactor.corpus import WINDOW, perturbation_corpus
from msfactor.linalg import fro


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--epsilons", type=float, nargs="+", default=[1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1])
    args = p.parse_args()
    eps = np.array(sorted(args.epsilons))

    for k, spec in enumerate(perturbation_corpus(args.seed, args.count)):
        dec = mstransform.decompose(spec.chi)
        e0, e1 = [], []
        for e in eps:
            s = spec.with_epsilon(e)
            ref = oracle.integrate_full(s, *WINDOW, tol=1e-11, include_perturbation=True).propagator.matrix
            e0.append(fro(perturb.zeroth_order(s, *WINDOW, dec).matrix - ref))
            e1.append(fro(perturb.dyson_first_order(dec, s, *WINDOW).matrix - ref))
        print(f"system {k}: n_a={spec.n_a} n_b={spec.n_b} delta={spec.delta.value:+.3f} d={np.round(spec.d_diag, 3)}")
        for row in zip(eps, e0, e1):
            print("  eps={:.0e}  zeroth={:.3e}  dyson1={:.3e}".format(*row))
        # slopes over the small-eps end only, where the expansion is asymptotic
        small = eps <= 0.1
        s0 = np.polyfit(np.log(eps[small]), np.log(np.array(e0)[small]), 1)[0]
        s1 = np.polyfit(np.log(eps[small]), np.log(np.array(e1)[small]), 1)[0]
        print(f"  slopes: zeroth {s0:.3f}, dyson1 {s1:.3f}")


if __name__ == "__main__":
    main()
