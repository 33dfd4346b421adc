import csv
import json

import numpy as np
import pytest

from macrophase import __version__
from macrophase.cli import EXIT_ERROR, EXIT_OK, EXIT_VIOLATED, main, parse_axis
from macrophase.errors import ConfigurationError
from macrophase.scenarios import CSV_COLUMNS

from conftest import CONFIGS


def _rows(path):
    with path.open() as fh:
        return list(csv.DictReader(fh))


def _write(tmp_path, raw, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(raw))
    return p


def sg_raw(**over):
    raw = {"scenario": "stern_gerlach", "grid": {"n_points": 1024, "q_min": -64, "q_max": 64},
           "branches": [{"c_re": float(np.sqrt(0.5))}, {"c_re": float(np.sqrt(0.5))}],
           "coupling_length": 20.0, "times": [0.0]}
    raw.update(over)
    return raw


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_run_sg_single_row(tmp_path):
    out = tmp_path / "out"
    cfg = _write(tmp_path, sg_raw(branches=[{"c_re": 0.6}, {"c_re": 0.0, "c_im": 0.8}]))
    assert main(["run", str(cfg), "--out", str(out)]) == EXIT_OK
    rows = _rows(out / "timeseries.csv")
    assert len(rows) == 1 and tuple(rows[0]) == CSV_COLUMNS
    r = rows[0]
    assert float(r["re_z"]) == 1 and float(r["im_z"]) == 0
    # pair (1, 0): arg(beta^* alpha)
    assert float(r["phi_rel"]) == pytest.approx(np.angle(np.conj(0.8j) * 0.6))
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["pair"] == [1, 0] and manifest["version"] == __version__
    assert all((out / p.rsplit("/", 1)[-1]).is_file() for p in manifest["outputs"])


def test_run_free_particle_all_satisfied(tmp_path):
    out = tmp_path / "g"
    assert main(["run", str(CONFIGS / "general.json"), "--out", str(out)]) == EXIT_OK
    assert {r["eq11_verdict"] for r in _rows(out / "timeseries.csv")} == {"satisfied"}


def test_run_definite_state_exit_two(tmp_path):
    out = tmp_path / "d"
    assert main(["run", str(CONFIGS / "definite_state.json"), "--out", str(out)]) == EXIT_VIOLATED
    assert {r["eq25_verdict"] for r in _rows(out / "timeseries.csv")} == {"undefined"}


def test_errors_are_json(tmp_path, capsys):
    cfg = _write(tmp_path, sg_raw(foo=1))
    assert main(["run", str(cfg), "--out", str(tmp_path / "x")]) == EXIT_ERROR
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ConfigurationError" and "foo" in err["message"]
    assert main(["run", str(tmp_path / "nope.json")]) == EXIT_ERROR


def test_parse_axis():
    name, values = parse_axis("coupling_length:5:50:10")
    assert name == "coupling_length" and len(values) == 10 and values[-1] == 50
    for bad in ("coupling_length:5:50:1", "coupling_length:5:50", "x:a:b:3"):
        with pytest.raises(ConfigurationError):
            parse_axis(bad)


def test_sweep_coupling_length(tmp_path):
    out = tmp_path / "s"
    cfg = _write(tmp_path, sg_raw(times=[0.0, 0.5], potential={"kind": "linear", "params": [0.3]}))
    assert main(["sweep", str(cfg), "--axis", "coupling_length:5:50:10", "--out", str(out)]) == EXIT_OK
    rows = _rows(out / "sweep.csv")
    assert len(rows) == 20
    assert [float(r["coupling_length"]) for r in rows[::2]] == pytest.approx(np.linspace(5, 50, 10))
    for r in rows:
        if float(r["t"]) == 0.5:
            expected = -2 * 0.3 * float(r["coupling_length"]) * 0.5
            assert (float(r["theta"]) - expected + np.pi) % (2 * np.pi) - np.pi == pytest.approx(0, abs=1e-5)


def test_sweep_alpha2_parallel_matches_serial(tmp_path):
    cfg = _write(tmp_path, sg_raw())
    assert main(["sweep", str(cfg), "--axis", "alpha2:0.05:0.95:19", "--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(["--jobs", "2", "sweep", str(cfg), "--axis", "alpha2:0.05:0.95:19",
                 "--out", str(tmp_path / "b")]) == EXIT_OK
    a = (tmp_path / "a" / "sweep.csv").read_text()
    assert a == (tmp_path / "b" / "sweep.csv").read_text()
    rows = _rows(tmp_path / "a" / "sweep.csv")
    assert len(rows) == 19
    assert [float(r["expect_o"]) for r in rows] == pytest.approx(np.linspace(0.05, 0.95, 19) - 0.5)


def test_sweep_rejects_non_numeric(tmp_path, capsys):
    cfg = _write(tmp_path, sg_raw())
    assert main(["sweep", str(cfg), "--axis", "scenario:0:1:3", "--out", str(tmp_path / "e")]) == EXIT_ERROR
    assert "not numeric" in capsys.readouterr().err


def test_falsify_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["falsify", "--trials", "40", "--seed", "5", "--out", str(a)]) == EXIT_OK
    assert main(["falsify", "--trials", "40", "--seed", "5", "--out", str(b)]) == EXIT_OK
    assert (a / "falsifier_report.json").read_bytes() == (b / "falsifier_report.json").read_bytes()
    report = json.loads((a / "falsifier_report.json").read_text())
    assert report["reports"]["uncertainty"]["violations"] == 0


def test_falsify_zero_trials(tmp_path):
    assert main(["falsify", "--trials", "0", "--out", str(tmp_path)]) == EXIT_ERROR
