import csv
import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from msfactor.cli import main
from msfactor.config import config_to_json, load_config, parse_config, system_to_json
from msfactor.corpus import random_system
from msfactor.errors import ConfigError, PreconditionError

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _rows(path):
    lines = Path(path).read_text().splitlines()
    assert lines[0].startswith("# msfactor")
    return list(csv.reader(lines[1:]))


@given(st.integers(0, 2**32 - 1))
def test_config_roundtrip_fixpoint(seed):
    spec = random_system(np.random.default_rng(seed), epsilon=0.1)
    obj = {"system": system_to_json(spec), "hermitian_checks": [{"name": "m", "matrix": [[[1, 0]]]}]}
    cfg = parse_config(obj)
    once = config_to_json(cfg)
    assert config_to_json(parse_config(json.loads(json.dumps(once)))) == once
    assert np.array_equal(cfg.system.chi, spec.chi)


def test_config_errors_name_the_field():
    with pytest.raises(ConfigError) as info:
        parse_config({"system": {"n_a": 2, "n_b": 1, "chi": [[[1, 0]], [[0, "x"]]]}})
    assert info.value.field == "system.chi[1][0]"
    with pytest.raises(ConfigError) as info:
        parse_config({"system": {"n_a": 2, "n_b": 1, "chi": [[1], [1]], "pulse": {"kind": "box"}}})
    assert info.value.field == "system.pulse.kind"
    with pytest.raises(PreconditionError):
        load_config(CONFIGS / "invalid_na_lt_nb.json")


def test_decompose_examples(tmp_path):
    assert main(["decompose", "--config", str(CONFIGS / "minimal_1x1.json"), "--out", str(tmp_path)]) == 0
    out = json.loads((tmp_path / "decompose.json").read_text())
    assert out["lambdas"] == [1.0]
    assert out["state_ordering"] == "dark, coupled-a, b" and out["version"]
    assert main(["decompose", "--config", str(CONFIGS / "example_3x2.json"), "--out", str(tmp_path)]) == 0
    out = json.loads((tmp_path / "decompose.json").read_text())
    assert np.allclose(out["lambdas"], [1.3066, 0.5412], atol=1e-4)


def test_exit_codes(tmp_path):
    assert main(["decompose", "--config", str(CONFIGS / "invalid_na_lt_nb.json"), "--out", str(tmp_path)]) == 3
    bad = tmp_path / "bad.json"
    bad.write_text('{"system": {"n_a": 1}}')
    assert main(["decompose", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert main(["decompose", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 2
    assert main(["propagate", "--out", str(tmp_path)]) == 2


def test_numeric_failure_exit_code(tmp_path):
    cfg = {
        "system": {"n_a": 1, "n_b": 1, "chi": [[[400, 0]]], "pulse": {"kind": "constant", "amplitude": 1},
                   "detuning": {"kind": "linear-chirp", "value": 0, "slope": 1}},
        "time": {"t_i": 0, "t_f": 2000},
        "tol": 1e-12,
        "propagate": {"n_points": 2},
    }
    path = tmp_path / "hard.json"
    path.write_text(json.dumps(cfg))
    import msfactor.oracle as oracle
    import msfactor.twostate as twostate

    mp = pytest.MonkeyPatch()
    mp.setattr(twostate, "MAX_STEPS", 2**10)
    mp.setattr(oracle, "MAX_STEPS", 2**10)
    try:
        assert main(["propagate", "--config", str(path), "--out", str(tmp_path)]) == 4
    finally:
        mp.undo()


def test_propagate_pi_pulse(tmp_path):
    assert main(["propagate", "--config", str(CONFIGS / "pi_pulse.json"), "--out", str(tmp_path)]) == 0
    for name in ("propagate_ms.csv", "propagate_oracle.csv"):
        rows = _rows(tmp_path / name)
        assert rows[0] == ["t", "p_1", "p_2"]
        assert all(len(r) == 3 for r in rows)
        final = [float(x) for x in rows[-1][1:]]
        assert final == pytest.approx([0, 1], abs=1e-6)
    assert (tmp_path / "propagate_ms.csv").read_bytes().count(b"\r") == 0


def test_propagate_3x2_discrepancy(tmp_path):
    assert main(["propagate", "--config", str(CONFIGS / "example_3x2.json"), "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "propagate_ms.csv")
    assert all(len(r) == 6 for r in rows)
    side = json.loads((tmp_path / "propagate.json").read_text())
    assert side["final_max_population_discrepancy"] <= 1e-6


def _sweep(tmp_path, d_diag, epsilons):
    cfg = json.loads((CONFIGS / "example_3x2.json").read_text())
    cfg["system"]["d_diag"] = d_diag
    cfg["sweep"]["epsilons"] = epsilons
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps(cfg))
    assert main(["sweep-epsilon", "--config", str(path), "--out", str(tmp_path), "--jobs", "3"]) == 0
    rows = [[float(x) for x in r] for r in _rows(tmp_path / "sweep_epsilon.csv")[1:]]
    side = json.loads((tmp_path / "sweep_epsilon.json").read_text())
    return rows, side


def test_sweep_slopes_and_zero_row(tmp_path):
    rows, side = _sweep(tmp_path, [0.4, -0.4], [0.1, 0.0, 0.001, 0.01, 0.03, 0.003])
    assert [r[0] for r in rows] == sorted(r[0] for r in rows)
    assert rows[0][0] == 0.0 and rows[0][2] <= 1e-9
    assert side["slope_err_zeroth"] == pytest.approx(1.0, abs=0.2)
    assert side["slope_err_dyson1"] == pytest.approx(2.0, abs=0.2)


def test_sweep_uniform_perturbation_is_exact(tmp_path):
    rows, _ = _sweep(tmp_path, [0.5, 0.5], [0.01, 0.1, 0.5])
    assert all(r[1] <= 1e-9 and r[2] <= 1e-9 for r in rows)


def test_sweep_needs_three_points(tmp_path):
    cfg = json.loads((CONFIGS / "example_3x2.json").read_text())
    cfg["sweep"]["epsilons"] = [0.1, 0.2]
    path = tmp_path / "s.json"
    path.write_text(json.dumps(cfg))
    assert main(["sweep-epsilon", "--config", str(path), "--out", str(tmp_path)]) == 2


def test_outputs_are_deterministic(tmp_path):
    for k in (1, 2):
        out = tmp_path / str(k)
        assert main(["propagate", "--config", str(CONFIGS / "example_3x2.json"), "--out", str(out)]) == 0
        assert main(["decompose", "--config", str(CONFIGS / "example_3x2.json"), "--out", str(out)]) == 0
    for name in ("propagate_ms.csv", "propagate_oracle.csv", "propagate.json", "decompose.json"):
        assert (tmp_path / "1" / name).read_bytes() == (tmp_path / "2" / name).read_bytes()


def test_verify_flags_doctored_matrix(tmp_path, capsys):
    code = main(["verify", "--config", str(CONFIGS / "doctored_nonhermitian.json"), "--out", str(tmp_path)])
    assert code == 1
    report = (tmp_path / "verify.txt").read_text()
    assert "FAIL linalg.input_hermitian[gram_doctored]" in report
