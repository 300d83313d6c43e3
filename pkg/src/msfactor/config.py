"""JSON run configuration.

Complex numbers are ``[re, im]`` pairs; pulse and detuning profiles are
tagged by an explicit ``kind``. Example::

    {
      "system": {
        "n_a": 3, "n_b": 2,
        "chi": [[[1, 0], [0.7071, 0]], [[0, 0], [0.7071, 0]], [[0, 0], [0, 0]]],
        "pulse": {"kind": "gaussian", "amplitude": 1, "center": 0, "width": 1},
        "detuning": {"kind": "constant", "value": 0.5},
        "d_diag": [0.3, -0.3],
        "d_shape": {"kind": "constant", "amplitude": 1},
        "epsilon": 0.0
      },
      "time": {"t_i": -4, "t_f": 4},
      "tol": 1e-9
    }
"""
from dataclasses import dataclass, field
import json

import numpy as np

from .errors import ConfigError, PreconditionError, ShapeError
from .model import DETUNING_KINDS, PULSE_KINDS, DetuningProfile, PulseShape, SystemSpec

DEFAULT_EPSILONS = (1e-3, 3e-3, 1e-2, 3e-2, 1e-1)


@dataclass(frozen=True)
class RunConfig:
    system: SystemSpec
    t_i: float = -4.0
    t_f: float = 4.0
    tol: float = 1e-9
    method: str = None
    n_points: int = 101
    initial_state: int = 0
    epsilons: tuple = DEFAULT_EPSILONS
    grid: int = 1024
    hermitian_checks: tuple = field(default_factory=tuple)


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(where, f"expected a number, got {value!r}")
    return float(value)


def _complex(value, where):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(_number(value[0], where), _number(value[1], where))
    raise ConfigError(where, f"expected [re, im], got {value!r}")


def parse_complex_matrix(rows, where):
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ConfigError(where, "expected a non-empty list of rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ConfigError(where, "rows have different lengths")
    return np.array(
        [[_complex(x, f"{where}[{i}][{j}]") for j, x in enumerate(r)] for i, r in enumerate(rows)],
        dtype=np.complex128,
    )


def encode_complex_matrix(m):
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(m)]


def _pulse(obj, where):
    if obj is None:
        return PulseShape()
    if not isinstance(obj, dict):
        raise ConfigError(where, "expected an object")
    kind = obj.get("kind")
    if kind not in PULSE_KINDS:
        raise ConfigError(f"{where}.kind", f"must be one of {PULSE_KINDS}, got {kind!r}")
    kw = {k: _number(obj[k], f"{where}.{k}") for k in ("amplitude", "center", "width") if k in obj}
    try:
        return PulseShape(kind, **kw)
    except PreconditionError as exc:
        raise ConfigError(where, str(exc)) from exc


def _detuning(obj, where):
    if obj is None:
        return DetuningProfile()
    if not isinstance(obj, dict):
        raise ConfigError(where, "expected an object")
    kind = obj.get("kind")
    if kind not in DETUNING_KINDS:
        raise ConfigError(f"{where}.kind", f"must be one of {DETUNING_KINDS}, got {kind!r}")
    kw = {k: _number(obj[k], f"{where}.{k}") for k in ("value", "slope") if k in obj}
    return DetuningProfile(kind, **kw)


def parse_system(obj, where="system"):
    """Build a :class:`SystemSpec`. ``n_a < n_b`` raises :class:`PreconditionError`."""
    if not isinstance(obj, dict):
        raise ConfigError(where, "expected an object")
    for key in ("n_a", "n_b", "chi"):
        if key not in obj:
            raise ConfigError(f"{where}.{key}", "missing")
    n_a, n_b = obj["n_a"], obj["n_b"]
    for key, val in (("n_a", n_a), ("n_b", n_b)):
        if isinstance(val, bool) or not isinstance(val, int) or val < 1:
            raise ConfigError(f"{where}.{key}", f"expected a positive integer, got {val!r}")
    chi = parse_complex_matrix(obj["chi"], f"{where}.chi")
    if chi.shape != (n_a, n_b):
        raise ConfigError(f"{where}.chi", f"shape {chi.shape} does not match ({n_a}, {n_b})")
    d = obj.get("d_diag")
    if d is not None:
        if not isinstance(d, list):
            raise ConfigError(f"{where}.d_diag", "expected a list")
        d = [_number(x, f"{where}.d_diag[{i}]") for i, x in enumerate(d)]
        if len(d) != n_b:
            raise ConfigError(f"{where}.d_diag", f"expected {n_b} entries, got {len(d)}")
    eps = _number(obj.get("epsilon", 0.0), f"{where}.epsilon")
    if eps < 0:
        raise ConfigError(f"{where}.epsilon", "must be nonnegative")
    if n_a < n_b:
        raise PreconditionError(f"n_a={n_a} < n_b={n_b}")
    try:
        return SystemSpec(
            n_a=n_a,
            n_b=n_b,
            chi=chi,
            pulse=_pulse(obj.get("pulse"), f"{where}.pulse"),
            delta=_detuning(obj.get("detuning"), f"{where}.detuning"),
            d_diag=d,
            d_shape=_pulse(obj.get("d_shape"), f"{where}.d_shape"),
            epsilon=eps,
        )
    except ShapeError as exc:
        raise ConfigError(where, str(exc)) from exc


def parse_config(obj):
    if not isinstance(obj, dict):
        raise ConfigError("<root>", "expected a JSON object")
    if "system" not in obj:
        raise ConfigError("system", "missing")
    system = parse_system(obj["system"])
    time = obj.get("time", {})
    if not isinstance(time, dict):
        raise ConfigError("time", "expected an object")
    t_i = _number(time.get("t_i", -4.0), "time.t_i")
    t_f = _number(time.get("t_f", 4.0), "time.t_f")
    if t_f < t_i:
        raise ConfigError("time", "t_f precedes t_i")
    tol = _number(obj.get("tol", 1e-9), "tol")
    method = obj.get("method")
    if method is not None and method not in ("analytic-resonant", "analytic-constant", "numeric"):
        raise ConfigError("method", f"unknown method {method!r}")
    prop = obj.get("propagate", {})
    n_points = prop.get("n_points", 101)
    if isinstance(n_points, bool) or not isinstance(n_points, int) or n_points < 2:
        raise ConfigError("propagate.n_points", "expected an integer >= 2")
    init = prop.get("initial_state", 0)
    if isinstance(init, bool) or not isinstance(init, int) or not 0 <= init < system.dim:
        raise ConfigError("propagate.initial_state", f"expected an index in [0, {system.dim})")
    sweep = obj.get("sweep", {})
    eps = sweep.get("epsilons", list(DEFAULT_EPSILONS))
    if not isinstance(eps, list):
        raise ConfigError("sweep.epsilons", "expected a list")
    eps = tuple(_number(x, f"sweep.epsilons[{i}]") for i, x in enumerate(eps))
    if any(e < 0 for e in eps):
        raise ConfigError("sweep.epsilons", "values must be nonnegative")
    grid = sweep.get("grid", 1024)
    if isinstance(grid, bool) or not isinstance(grid, int) or grid < 64:
        raise ConfigError("sweep.grid", "expected an integer >= 64")
    checks = []
    for i, item in enumerate(obj.get("hermitian_checks", [])):
        if not isinstance(item, dict) or "matrix" not in item:
            raise ConfigError(f"hermitian_checks[{i}]", "expected {name, matrix}")
        checks.append(
            (str(item.get("name", f"matrix_{i}")), parse_complex_matrix(item["matrix"], f"hermitian_checks[{i}].matrix"))
        )
    return RunConfig(
        system=system,
        t_i=t_i,
        t_f=t_f,
        tol=tol,
        method=method,
        n_points=n_points,
        initial_state=init,
        epsilons=eps,
        grid=grid,
        hermitian_checks=tuple(checks),
    )


def system_to_json(spec):
    def pulse(p):
        return {"kind": p.kind, "amplitude": p.amplitude, "center": p.center, "width": p.width}

    det = spec.delta
    if not isinstance(det, DetuningProfile):
        raise ConfigError("system.detuning", "only plain detuning profiles are serializable")
    return {
        "n_a": spec.n_a,
        "n_b": spec.n_b,
        "chi": encode_complex_matrix(spec.chi),
        "pulse": pulse(spec.pulse),
        "detuning": {"kind": det.kind, "value": det.value, "slope": det.slope},
        "d_diag": [float(x) for x in spec.d_diag],
        "d_shape": pulse(spec.d_shape),
        "epsilon": spec.epsilon,
    }


def config_to_json(cfg):
    out = {
        "system": system_to_json(cfg.system),
        "time": {"t_i": cfg.t_i, "t_f": cfg.t_f},
        "tol": cfg.tol,
        "propagate": {"n_points": cfg.n_points, "initial_state": cfg.initial_state},
        "sweep": {"epsilons": list(cfg.epsilons), "grid": cfg.grid},
    }
    if cfg.method is not None:
        out["method"] = cfg.method
    if cfg.hermitian_checks:
        out["hermitian_checks"] = [
            {"name": name, "matrix": encode_complex_matrix(m)} for name, m in cfg.hermitian_checks
        ]
    return out


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError("--config", f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"invalid JSON: {exc}") from exc
    return parse_config(obj)
