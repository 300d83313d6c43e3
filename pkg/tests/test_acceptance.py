"""One test per acceptance criterion, each at its stated tolerance and time budget."""
import os
import subprocess
import sys
import time

import numpy as np

from msfactor import assemble, linalg, mstransform, oracle, perturb, twostate
from msfactor.corpus import WINDOW, factorization_corpus, perturbation_corpus, random_chi
from msfactor.linalg import adjoint, fro
from msfactor.model import DetuningProfile, PulseShape, SystemSpec, absorb_uniform_shift, hamiltonian

EPSILONS = (1e-3, 3e-3, 1e-2, 3e-2, 1e-1)


def test_exact_factorization(criterion):
    start = time.perf_counter()
    worst_pattern = worst_h = 0.0
    for spec in factorization_corpus():
        dec = mstransform.decompose(spec.chi)
        worst_pattern = max(worst_pattern, mstransform.pattern_residual(dec) / fro(spec.chi))
        s = dec.s_matrix()
        for t in np.linspace(*WINDOW, 5):
            h0 = hamiltonian(spec, t)
            h_ms = mstransform.ms_hamiltonian(dec, float(spec.delta(t)), float(spec.pulse(t)))
            worst_h = max(worst_h, fro(s @ h0 @ adjoint(s) - h_ms) / fro(h0))
    elapsed = time.perf_counter() - start
    ok = worst_pattern <= 1e-10 and worst_h <= 1e-10 and elapsed < 5
    criterion(1, "exact MS factorization", ok,
              f"pattern {worst_pattern:.2e}, H_MS {worst_h:.2e}, {elapsed:.2f}s")


def test_end_to_end_propagator(criterion):
    start = time.perf_counter()
    worst = 0.0
    for spec in factorization_corpus():
        u = assemble.ms_assembled(spec, *WINDOW).matrix
        ref = oracle.integrate_full(spec, *WINDOW, tol=1e-9).propagator.matrix
        worst = max(worst, fro(u - ref))
    elapsed = time.perf_counter() - start
    criterion(2, "MS-assembled vs oracle propagator", worst <= 1e-6 and elapsed < 30,
              f"max distance {worst:.2e}, {elapsed:.2f}s")


def test_dark_state_independence(criterion):
    rng = np.random.default_rng(99)
    worst, count = 0.0, 0
    for spec in factorization_corpus():
        dec = mstransform.decompose(spec.chi)
        nd = dec.n_structural_dark
        if nd < 2:
            continue
        count += 1
        cks = assemble.pair_propagators(dec, spec.delta, spec.pulse, *WINDOW)
        u = assemble.diabatic_propagator(dec, cks).matrix
        remixed = dec.with_dark_rows(linalg.random_unitary(nd, rng) @ dec.a_matrix[:nd])
        for route in (assemble.diabatic_propagator, assemble.similarity_propagator):
            worst = max(worst, fro(route(remixed, cks).matrix - u))
    criterion(3, "dark-state independence", count > 0 and worst <= 1e-9,
              f"{count} systems, max change {worst:.2e}")


def test_cayley_klein_relation(criterion):
    rng = np.random.default_rng(4)
    worst = 0.0
    for spec in factorization_corpus():
        dec = mstransform.decompose(spec.chi)
        for ck in assemble.pair_propagators(dec, spec.delta, spec.pulse, *WINDOW):
            worst = max(worst, ck.norm_defect)
    const = PulseShape("constant", 1.0)
    for _ in range(30):
        lam, d0, T = rng.uniform(0, 2), rng.uniform(-2, 2), rng.uniform(0.1, 3)
        for method in ("analytic-constant", "numeric"):
            ck = twostate.propagate_two_state(lam, DetuningProfile("constant", d0), const, 0, T, method)
            worst = max(worst, ck.norm_defect)
    pi = twostate.propagate_two_state(np.pi / 2, DetuningProfile(), const, 0.0, 1.0, "analytic-resonant")
    pi_err = abs(abs(pi.beta) - 1)
    criterion(4, "Cayley-Klein relation and resonant pi pulse", worst <= 1e-10 and pi_err <= 1e-10,
              f"max | |a|^2+|b|^2-1 | {worst:.2e}, pi-pulse | |b|-1 | {pi_err:.2e}")


def test_nb2_closed_forms(criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(2)
    lam_err = vec_err = 0.0
    for _ in range(100):
        v = random_chi(rng, int(rng.integers(2, 7)), 2)
        closed = mstransform.nb2_closed_form(v)
        dec = mstransform.decompose(v)
        lam_err = max(lam_err, np.max(np.abs([closed.lambda_plus, closed.lambda_minus] - dec.lambdas)))
        b = dec.b_states()
        vec_err = max(vec_err, 1 - abs(np.vdot(closed.b_plus, b[:, 0])), 1 - abs(np.vdot(closed.b_minus, b[:, 1])))
    elapsed = time.perf_counter() - start
    ok = lam_err <= 1e-10 and vec_err <= 1e-9 and elapsed < 2
    criterion(5, "N_b=2 closed forms", ok,
              f"lambda {lam_err:.2e}, eigenvector {vec_err:.2e}, {elapsed:.2f}s")


def test_perturbative_order(criterion):
    start = time.perf_counter()
    slopes0, slopes1 = [], []
    for spec in perturbation_corpus():
        assert abs(np.sum(spec.d_diag)) < 1e-12
        dec = mstransform.decompose(spec.chi)
        e0, e1 = [], []
        for eps in EPSILONS:
            s = spec.with_epsilon(eps)
            ref = oracle.integrate_full(s, *WINDOW, tol=1e-11, include_perturbation=True).propagator.matrix
            e0.append(fro(perturb.zeroth_order(s, *WINDOW, dec).matrix - ref))
            e1.append(fro(perturb.dyson_first_order(dec, s, *WINDOW).matrix - ref))
        slopes0.append(np.polyfit(np.log(EPSILONS), np.log(e0), 1)[0])
        slopes1.append(np.polyfit(np.log(EPSILONS), np.log(e1), 1)[0])
    elapsed = time.perf_counter() - start
    ok = all(abs(s - 1) <= 0.2 for s in slopes0) and all(abs(s - 2) <= 0.2 for s in slopes1) and elapsed < 60
    criterion(6, "perturbative order", ok,
              f"zeroth slopes {np.round(slopes0, 3).tolist()}, dyson slopes {np.round(slopes1, 3).tolist()}, "
              f"{elapsed:.2f}s")


def test_s1_solver_consistency(criterion):
    res = adj = 0.0
    for spec in perturbation_corpus() + factorization_corpus():
        dec = mstransform.decompose(spec.chi)
        sol = perturb.solve_s1(dec, spec.d_diag, float(spec.delta(0.0)))
        res = max(res, sol.residual)
        adj = max(adj, *perturb.adjoint_pair_check(dec, sol.s))
    dec = mstransform.decompose(mstransform.pattern([1.4, 0.6], 3))
    d = np.array([0.5, -0.5])
    sol = perturb.solve_s1(dec, d, 1.0)
    shift_err = fro(sol.level_shifts - d) + fro(sol.s.full())
    ok = res <= 1e-10 and adj <= 1e-10 and shift_err <= 1e-12
    criterion(7, "S1 solver consistency", ok,
              f"projected residual {res:.2e}, pure-shift {shift_err:.2e}, adjoint pair {adj:.2e}")


def test_uniform_shift_exactness(criterion):
    worst = 0.0
    for spec in factorization_corpus(count=5):
        uniform = SystemSpec(spec.n_a, spec.n_b, spec.chi, spec.pulse, spec.delta,
                             np.full(spec.n_b, 0.7), spec.d_shape, 0.5)
        u = assemble.ms_assembled(absorb_uniform_shift(uniform), *WINDOW).matrix
        ref = oracle.integrate_full(uniform, *WINDOW, tol=1e-11, include_perturbation=True).propagator.matrix
        worst = max(worst, fro(u - ref))
    criterion(8, "uniform shift absorbed exactly at eps=0.5", worst <= 1e-9, f"max distance {worst:.2e}")


def test_eigensolver_cross_validation(criterion):
    rng = np.random.default_rng(9)
    worst = 0.0
    for k in range(200):
        m = linalg.random_hermitian(1 + k % 3, rng)
        worst = max(worst, np.max(np.abs(linalg.hermitian_eig(m).values - oracle.charpoly_eigs(m))))
    criterion(9, "Jacobi vs characteristic polynomial", worst <= 1e-9, f"max difference {worst:.2e}")


def test_verify_suite(criterion, tmp_path):
    cmd = [sys.executable, "-m", "msfactor.cli", "verify", "--seed", "42"]
    env = dict(os.environ)
    start = time.perf_counter()
    first = subprocess.run(cmd, capture_output=True, env=env, cwd=tmp_path)
    elapsed = time.perf_counter() - start
    second = subprocess.run(cmd, capture_output=True, env=env, cwd=tmp_path)
    same = first.stdout == second.stdout
    ok = first.returncode == 0 and elapsed < 120 and same
    criterion(10, "msfactor verify", ok,
              f"exit {first.returncode}, {elapsed:.1f}s, identical bytes {same}")
