"""Command-line entry point.

    msfactor decompose|propagate|sweep-epsilon|verify --config PATH
             [--seed N] [--out DIR] [--tol X] [--jobs N]

Exit codes: 0 ok, 1 property failure, 2 config error, 3 precondition
violation, 4 numeric failure.
"""
import argparse
from concurrent.futures import ThreadPoolExecutor
import json
import os
import sys

import numpy as np

from . import __version__, assemble, oracle, perturb
from .config import encode_complex_matrix, load_config
from .errors import ConfigError, ConvergenceError, MSFactorError, PreconditionError
from .linalg import fro
from .model import absorb_uniform_shift, reference_detuning
from .mstransform import decompose, pattern_residual
from .twostate import choose_method, propagate_two_state_grid
from .verify import format_report, run_verify

EXIT_OK, EXIT_PROPERTY, EXIT_CONFIG, EXIT_PRECONDITION, EXIT_NUMERIC = range(5)

MS_ORDERING = "dark, coupled-a, b"
DIABATIC_ORDERING = "a_1..a_{n_a}, b_1..b_{n_b} (populations; MS basis order is dark, coupled-a, b)"


def _fmt(x):
    return format(float(x), ".17g")


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, header, rows, comment):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# {comment}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _meta(ordering):
    return {"version": __version__, "state_ordering": ordering}


def cmd_decompose(cfg, args):
    dec = decompose(cfg.system.chi)
    out = {
        "lambdas": [float(x) for x in dec.lambdas],
        "n_dark": int(dec.n_dark),
        "a_matrix": encode_complex_matrix(dec.a_matrix),
        "b_matrix": encode_complex_matrix(dec.b_matrix),
        "pattern_residual": float(pattern_residual(dec)),
        **_meta(MS_ORDERING),
    }
    _write_json(os.path.join(args.out, "decompose.json"), out)
    return EXIT_OK


def _ms_populations(spec, times, c0, tol):
    dec = decompose(spec.chi)
    method = choose_method(spec.delta, spec.pulse)
    per_pair = [
        propagate_two_state_grid(float(lam), spec.delta, spec.pulse, times, method=method, tol=tol)
        for lam in dec.lambdas
    ]
    pops = []
    for k in range(times.size):
        u = assemble.diabatic_propagator(dec, [cks[k] for cks in per_pair]).matrix
        pops.append(np.abs(u @ c0) ** 2)
    return np.array(pops)


def cmd_propagate(cfg, args):
    spec = cfg.system
    tol = args.tol if args.tol is not None else cfg.tol
    times = np.linspace(cfg.t_i, cfg.t_f, cfg.n_points)
    c0 = np.zeros(spec.dim, dtype=np.complex128)
    c0[cfg.initial_state] = 1.0
    ms = _ms_populations(spec, times, c0, min(tol, 1e-11))
    us, est = oracle.integrate_grid(spec, times, tol=tol, include_perturbation=True)
    ref = np.abs(us @ c0) ** 2
    header = ["t"] + [f"p_{i + 1}" for i in range(spec.dim)]
    comment = f"msfactor {__version__}; state ordering: {DIABATIC_ORDERING}"
    for name, pops in (("propagate_ms.csv", ms), ("propagate_oracle.csv", ref)):
        rows = np.column_stack([times, pops])
        _write_csv(os.path.join(args.out, name), header, rows, comment)
    side = {
        "final_max_population_discrepancy": float(np.max(np.abs(ms[-1] - ref[-1]))),
        "oracle_error_estimate": float(est),
        "perturbation_ignored_by_ms_path": bool(spec.epsilon != 0.0 and np.any(spec.d_diag)),
        **_meta(DIABATIC_ORDERING),
    }
    _write_json(os.path.join(args.out, "propagate.json"), side)
    return EXIT_OK


def _sweep_point(spec, dec, series, eps, cfg, tol):
    s = spec.with_epsilon(eps)
    ref = oracle.integrate_full(s, cfg.t_i, cfg.t_f, tol=tol, include_perturbation=True).propagator.matrix
    u0 = perturb.zeroth_order(s, cfg.t_i, cfg.t_f, dec).matrix
    u1 = perturb.dyson_first_order(dec, s, cfg.t_i, cfg.t_f, grid=cfg.grid).matrix
    return (eps, fro(u0 - ref), fro(u1 - ref), series.residual_1, series.residual_2)


def _slope(x, y):
    mask = (np.asarray(x) > 0) & (np.asarray(y) > 0)
    if mask.sum() < 2:
        return None
    return float(np.polyfit(np.log(np.asarray(x)[mask]), np.log(np.asarray(y)[mask]), 1)[0])


def cmd_sweep_epsilon(cfg, args):
    if len(cfg.epsilons) < 3:
        raise ConfigError("sweep.epsilons", "need at least 3 values")
    spec = cfg.system
    tol = args.tol if args.tol is not None else min(cfg.tol, 1e-11)
    shifted = absorb_uniform_shift(spec.with_epsilon(0.0))
    dec = decompose(spec.chi)
    series = perturb.perturbation_series(dec, shifted.d_diag, reference_detuning(spec))
    eps_list = sorted(set(cfg.epsilons))
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        rows = list(pool.map(lambda e: _sweep_point(spec, dec, series, e, cfg, tol), eps_list))
    rows.sort(key=lambda r: r[0])
    header = ["epsilon", "err_zeroth", "err_dyson1", "s1_residual", "s2_residual"]
    comment = f"msfactor {__version__}; state ordering: {MS_ORDERING}"
    _write_csv(os.path.join(args.out, "sweep_epsilon.csv"), header, rows, comment)
    eps = [r[0] for r in rows]
    side = {
        "slope_err_zeroth": _slope(eps, [r[1] for r in rows]),
        "slope_err_dyson1": _slope(eps, [r[2] for r in rows]),
        "delta_ref": series.delta_ref,
        "level_shifts": [float(x) for x in series.level_shifts],
        "s2_residual_variant_bracket": series.residual_2_variant,
        **_meta(MS_ORDERING),
    }
    _write_json(os.path.join(args.out, "sweep_epsilon.json"), side)
    return EXIT_OK


def cmd_verify(cfg, args):
    results = run_verify(seed=args.seed, config=cfg)
    report = format_report(results, args.seed)
    sys.stdout.write(report)
    if args.out:
        with open(os.path.join(args.out, "verify.txt"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(report)
    return EXIT_OK if all(r.passed for r in results) else EXIT_PROPERTY


COMMANDS = {
    "decompose": cmd_decompose,
    "propagate": cmd_propagate,
    "sweep-epsilon": cmd_sweep_epsilon,
    "verify": cmd_verify,
}


def build_parser():
    p = argparse.ArgumentParser(prog="msfactor", description=__doc__.split("\n\n")[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON run configuration (optional for verify)")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--tol", type=float, default=None, help="oracle tolerance override")
    p.add_argument("--jobs", type=int, default=1, help="concurrent sweep points")
    p.add_argument("--version", action="version", version=f"msfactor {__version__}")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.tol is not None and not 1e-12 <= args.tol <= 1e-4:
            raise ConfigError("--tol", "must lie in [1e-12, 1e-4]")
        if args.config is None:
            if args.command != "verify":
                raise ConfigError("--config", f"required for {args.command}")
            cfg = None
        else:
            cfg = load_config(args.config)
        if args.command != "verify" or args.out != ".":
            os.makedirs(args.out, exist_ok=True)
        if args.command == "verify" and args.out == ".":
            args.out = None
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PreconditionError as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ConvergenceError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except MSFactorError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
