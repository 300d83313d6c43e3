"""Invariant suites behind ``msfactor verify``.

Each check yields a :class:`CheckResult`. Reports contain no timings so the
same seed always produces the same bytes.
"""
from dataclasses import dataclass

import numpy as np

from . import assemble, linalg, mstransform, oracle, perturb, twostate
from .corpus import GAUSSIAN, WINDOW, factorization_corpus, perturbation_corpus, random_chi
from .errors import MSFactorError, NotHermitianError
from .linalg import adjoint, fro
from .model import DetuningProfile, PulseShape, SystemSpec, absorb_uniform_shift, hamiltonian


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def _check(name, value, limit):
    return CheckResult(name, bool(value <= limit), f"{value:.3e} <= {limit:.0e}")


def linalg_suite(rng):
    worst_rec = worst_orth = worst_char = worst_sim = 0.0
    for _ in range(30):
        n = int(rng.integers(1, 9))
        m = linalg.random_hermitian(n, rng)
        eig = linalg.hermitian_eig(m)
        v = eig.vectors
        worst_rec = max(worst_rec, fro(m - (v * eig.values) @ adjoint(v)) / max(fro(m), 1e-300))
        worst_orth = max(worst_orth, fro(adjoint(v) @ v - np.eye(n)))
        p = linalg.random_unitary(n, rng)
        other = linalg.hermitian_eig(adjoint(p) @ m @ p).values
        worst_sim = max(worst_sim, float(np.max(np.abs(other - eig.values))))
    for _ in range(200):
        n = int(rng.integers(1, 4))
        m = linalg.random_hermitian(n, rng)
        diff = np.abs(oracle.charpoly_eigs(m) - linalg.hermitian_eig(m).values)
        worst_char = max(worst_char, float(np.max(diff)))
    m = linalg.random_hermitian(4, rng)
    semigroup = fro(linalg.matrix_exp(m, 0.3) @ linalg.matrix_exp(m, 0.5) - linalg.matrix_exp(m, 0.8))
    a = rng.standard_normal((8, 5)) + 1j * rng.standard_normal((8, 5))
    b = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    x, res = linalg.solve_least_squares(a, b)
    x_ne = np.linalg.solve(adjoint(a) @ a, adjoint(a) @ b)
    return [
        _check("linalg.eig_reconstruction", worst_rec, 1e-11),
        _check("linalg.eig_orthonormality", worst_orth, 1e-12),
        _check("linalg.similarity_invariance", worst_sim, 1e-10),
        _check("linalg.charpoly_agreement", worst_char, 1e-9),
        _check("linalg.expm_semigroup", semigroup, 1e-10),
        _check("linalg.least_squares_vs_normal_equations", abs(res - fro(a @ x_ne - b)), 1e-9),
    ]


def decomposition_suite(systems, rng):
    pat = uni = spec_err = dark = hms = gram_gap = 0.0
    for spec in systems:
        dec = mstransform.decompose(spec.chi)
        vnorm = fro(spec.chi)
        pat = max(pat, mstransform.pattern_residual(dec) / vnorm)
        uni = max(
            uni,
            fro(dec.a_matrix @ adjoint(dec.a_matrix) - np.eye(dec.n_a)),
            fro(dec.b_matrix @ adjoint(dec.b_matrix) - np.eye(dec.n_b)),
        )
        vv, gram = mstransform.gram_matrices(spec.chi)
        ev = linalg.hermitian_eig(gram).values
        spec_err = max(spec_err, float(np.max(np.abs(dec.lambdas**2 - ev))))
        big = linalg.hermitian_eig(vv).values
        gram_gap = max(gram_gap, float(np.max(np.abs(big[: dec.n_b] - ev))), float(np.max(np.abs(big[dec.n_b :]), initial=0.0)))
        for row in dec.a_matrix[: dec.n_structural_dark]:
            dark = max(dark, fro(row @ spec.chi) / vnorm)
        s = dec.s_matrix()
        for t in np.linspace(*WINDOW, 5):
            h0 = hamiltonian(spec, t)
            target = mstransform.ms_hamiltonian(dec, float(spec.delta(t)), float(spec.pulse(t)))
            hms = max(hms, fro(s @ h0 @ adjoint(s) - target) / fro(h0))
    return [
        _check("mstransform.pattern", pat, 1e-10),
        _check("mstransform.unitarity", uni, 1e-12),
        _check("mstransform.spectral_consistency", spec_err, 1e-10),
        _check("mstransform.shared_spectrum_and_zero_modes", gram_gap, 1e-10),
        _check("mstransform.dark_rows_annihilate_v", dark, 1e-10),
        _check("mstransform.ms_hamiltonian", hms, 1e-10),
    ]


def nb2_suite(rng, count=100):
    lam_err = vec_err = 0.0
    for _ in range(count):
        n_a = int(rng.integers(2, 7))
        v = random_chi(rng, n_a, 2)
        closed = mstransform.nb2_closed_form(v)
        dec = mstransform.decompose(v)
        lam_err = max(lam_err, float(np.max(np.abs([closed.lambda_plus, closed.lambda_minus] - dec.lambdas))))
        b = dec.b_states()
        for k, vec in enumerate((closed.b_plus, closed.b_minus)):
            vec_err = max(vec_err, 1.0 - abs(np.vdot(vec, b[:, k])))
    return [
        _check("nb2.lambdas_match_eigensolver", lam_err, 1e-10),
        _check("nb2.b_vectors_match_up_to_phase", vec_err, 1e-9),
    ]


def twostate_suite(rng):
    ck_defect = comp = agree = 0.0
    const = PulseShape("constant", 1.0)
    for _ in range(50):
        lam = float(rng.uniform(0.0, 2.0))
        d0 = float(rng.uniform(-2.0, 2.0))
        T = float(rng.uniform(0.1, 3.0))
        det = DetuningProfile("constant", d0)
        a = twostate.propagate_two_state(lam, det, const, 0.0, T, "analytic-constant")
        n = twostate.propagate_two_state(lam, det, const, 0.0, T, "numeric")
        agree = max(agree, fro(a.matrix() - n.matrix()))
        ck_defect = max(ck_defect, a.norm_defect, n.norm_defect)
    chirp = DetuningProfile("linear-chirp", 0.3, 0.4)
    for lam in (0.5, 1.3, 2.2):
        whole = twostate.propagate_two_state(lam, chirp, GAUSSIAN, -4.0, 4.0)
        first = twostate.propagate_two_state(lam, chirp, GAUSSIAN, -4.0, 0.7)
        second = twostate.propagate_two_state(lam, chirp, GAUSSIAN, 0.7, 4.0)
        comp = max(comp, fro(second.matrix() @ first.matrix() - whole.matrix()))
        ck_defect = max(ck_defect, whole.norm_defect)
    pi = twostate.propagate_two_state(np.pi / 2, DetuningProfile(), PulseShape(), 0.0, 1.0, "analytic-resonant")
    return [
        _check("twostate.cayley_klein_relation", ck_defect, 1e-10),
        _check("twostate.composition", comp, 1e-9),
        _check("twostate.analytic_vs_numeric", agree, 1e-8),
        _check("twostate.resonant_pi_pulse", abs(abs(pi.beta) - 1.0), 1e-10),
    ]


def assembly_suite(systems, rng, tol=1e-9):
    indep = basis = cols = e2e = 0.0
    for spec in systems:
        dec = mstransform.decompose(spec.chi)
        cks = assemble.pair_propagators(dec, spec.delta, spec.pulse, *WINDOW)
        u = assemble.diabatic_propagator(dec, cks).matrix
        basis = max(basis, fro(assemble.similarity_propagator(dec, cks).matrix - u))
        cols = max(cols, float(np.max(np.abs(np.linalg.norm(u, axis=0) - 1.0))))
        nd = dec.n_structural_dark
        if nd >= 2:
            remixed = dec.with_dark_rows(linalg.random_unitary(nd, rng) @ dec.a_matrix[:nd])
            indep = max(indep, fro(assemble.similarity_propagator(remixed, cks).matrix - u))
            indep = max(indep, fro(assemble.diabatic_propagator(remixed, cks).matrix - u))
        ref = oracle.integrate_full(spec, *WINDOW, tol=tol)
        e2e = max(e2e, fro(ref.propagator.matrix - u))
    return [
        _check("assemble.dark_state_independence", indep, 1e-9),
        _check("assemble.projector_vs_similarity", basis, 1e-12),
        _check("assemble.column_norms", cols, 1e-9),
        _check("assemble.oracle_equivalence", e2e, 1e-6),
    ]


def perturbation_suite(systems, epsilons=(1e-3, 3e-3, 1e-2, 3e-2, 1e-1), slope_systems=5):
    res1 = adj = 0.0
    slopes0, slopes1 = [], []
    for k, spec in enumerate(systems):
        dec = mstransform.decompose(spec.chi)
        delta_ref = float(spec.delta(0.0))
        sol = perturb.solve_s1(dec, spec.d_diag, delta_ref)
        res1 = max(res1, sol.residual)
        adj = max(adj, *perturb.adjoint_pair_check(dec, sol.s))
        if k < slope_systems:
            e0, e1 = [], []
            for eps in epsilons:
                s = spec.with_epsilon(eps)
                ref = oracle.integrate_full(s, *WINDOW, tol=1e-11, include_perturbation=True).propagator.matrix
                e0.append(fro(perturb.zeroth_order(s, *WINDOW, dec).matrix - ref))
                e1.append(fro(perturb.dyson_first_order(dec, s, *WINDOW).matrix - ref))
            x = np.log(epsilons)
            slopes0.append(np.polyfit(x, np.log(e0), 1)[0])
            slopes1.append(np.polyfit(x, np.log(e1), 1)[0])
    # B0 = I with an already patterned V: the perturbation is a pure per-pair shift
    lam = np.array([1.4, 0.6])
    dec = mstransform.decompose(mstransform.pattern(lam, 3))
    sol = perturb.solve_s1(dec, [0.5, -0.5], 1.0)
    shift_err = fro(sol.level_shifts - np.array([0.5, -0.5])) + fro(sol.s.full())
    # uniform shift absorbed into the detuning is exact at large eps
    spec = systems[0]
    uniform = SystemSpec(spec.n_a, spec.n_b, spec.chi, spec.pulse, spec.delta,
                         np.full(spec.n_b, 0.8), spec.d_shape, 0.5)
    absorbed = absorb_uniform_shift(uniform)
    u_ms = assemble.ms_assembled(absorbed, *WINDOW).matrix
    ref = oracle.integrate_full(uniform, *WINDOW, tol=1e-11, include_perturbation=True).propagator.matrix
    out = [
        _check("perturb.s1_projected_residual", res1, 1e-10),
        _check("perturb.adjoint_pair_identity", adj, 1e-10),
        _check("perturb.pure_shift_case", shift_err, 1e-12),
        _check("perturb.uniform_shift_exactness", fro(u_ms - ref), 1e-9),
    ]
    if slopes1:
        out.append(_check("perturb.dyson_slope", max(abs(s - 2.0) for s in slopes1), 0.2))
        out.append(_check("perturb.zeroth_slope", max(abs(s - 1.0) for s in slopes0), 0.2))
    return out


def matrix_suite(checks):
    out = []
    for name, m in checks:
        try:
            eig = linalg.hermitian_eig(m)
        except NotHermitianError as exc:
            out.append(CheckResult(f"linalg.input_hermitian[{name}]", False, str(exc)))
            continue
        except MSFactorError as exc:
            out.append(CheckResult(f"linalg.input_valid[{name}]", False, str(exc)))
            continue
        v = eig.vectors
        err = fro(m - (v * eig.values) @ adjoint(v)) / max(fro(m), 1e-300)
        out.append(_check(f"linalg.eig_reconstruction[{name}]", err, 1e-11))
    return out


def run_verify(seed=42, config=None):
    """Run every suite; returns the list of results."""
    rng = np.random.default_rng(seed)
    results = []
    results += linalg_suite(rng)
    corpus = factorization_corpus(seed=seed, count=20)
    if config is not None:
        corpus = [config.system] + corpus
    results += decomposition_suite(corpus, rng)
    results += nb2_suite(rng)
    results += twostate_suite(rng)
    results += assembly_suite(corpus, rng)
    results += perturbation_suite(perturbation_corpus(seed=seed, count=5))
    if config is not None:
        results += matrix_suite(config.hermitian_checks)
    return results


def format_report(results, seed):
    lines = [f"msfactor verify (seed={seed})"]
    lines += [r.line() for r in results]
    failed = sum(not r.passed for r in results)
    lines.append(f"summary: {len(results) - failed} passed, {failed} failed")
    return "\n".join(lines) + "\n"
