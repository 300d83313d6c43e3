"""Off-pattern norm of the transformed Hamiltonian S (H0 + eps D) S^dag at the
reference point, truncating S after zeroth, first and second order.

Also reports the b-block defect of the inverse-detuning form of the first-order
equations and the variant vs exact second-order bracket residuals.
"""
import argparse

import numpy as np

from msfactor import mstransform, perturb
from msfactor.corpus import perturbation_corpus


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--count", type=int, default=5)
    args = p.parse_args()

    for k, spec in enumerate(perturbation_corpus(args.seed, args.count)):
        dec = mstransform.decompose(spec.chi)
        delta = float(spec.delta(0.0))
        series = perturb.perturbation_series(dec, spec.d_diag, delta)
        _, inv_defect = perturb.solve_s1(dec, spec.d_diag, delta, inverse_detuning_form=True)
        print(f"system {k}: n_a={spec.n_a} n_b={spec.n_b}  level shifts {np.round(series.level_shifts, 4)}")
        print(f"  residual S1 {series.residual_1:.2e}  S2 exact {series.residual_2:.2e}"
              f"  S2 variant bracket {series.residual_2_variant:.2e}  b-eq defect {inv_defect:.2e}")
        for eps in (1e-3, 1e-2, 1e-1):
            norms = [
                perturb.off_pattern_norm(dec, perturb.transformed_hamiltonian(dec, spec.d_diag, series, eps, o))
                for o in (0, 1, 2)
            ]
            print("  eps={:.0e}  off-pattern: order0 {:.2e}  order1 {:.2e}  order2 {:.2e}".format(eps, *norms))


if __name__ == "__main__":
    main()
