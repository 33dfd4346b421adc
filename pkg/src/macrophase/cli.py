"""
Command-line front end.

    macrophase run CONFIG [--out DIR]
    macrophase sweep CONFIG --axis FIELD:START:STOP:COUNT [--out DIR] [--jobs N]
    macrophase falsify [--trials N] [--seed S] [--out DIR]

Exit codes: 0 ok, 2 a bound verdict is violated (or undefined on a definite
state; for ``falsify``, an uncertainty-relation violation), 1 error. Errors are
also printed to stderr as one JSON object.
"""
import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import ScenarioConfig, config_from_dict, parse_config, set_field
from .errors import ConfigurationError, MacrophaseError
from .falsifier import run_all
from .scenarios import (CSV_COLUMNS, PERES_COLUMNS, BOUND_ORDER, TimeSeries, run_general,
                        run_peres, run_stern_gerlach)

EXIT_OK, EXIT_ERROR, EXIT_VIOLATED = 0, 1, 2


@dataclass
class RunManifest:
    command: str
    config_path: str
    config: dict
    version: str
    duration_s: float
    outputs: list
    seed: int
    exit_code: int = EXIT_OK
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"command": self.command, "config_path": self.config_path, "config": self.config,
                "version": self.version, "duration_s": self.duration_s, "outputs": self.outputs,
                "seed": self.seed, "exit_code": self.exit_code, **self.extra}


def _clean(obj):
    """JSON-safe copy: NaN and infinities become null, numpy scalars become Python."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": _clean(obj.real), "im": _clean(obj.imag)}
    return obj


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n")


def write_csv(path: Path, columns, records) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns))
        writer.writeheader()
        for rec in records:
            writer.writerow({k: _csv_value(rec[k]) for k in columns})


def _csv_value(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


def run_scenario(cfg: ScenarioConfig) -> TimeSeries:
    if cfg.scenario == "general":
        return run_general(cfg)
    return run_stern_gerlach(cfg)


def _bounds_document(ts: TimeSeries) -> dict:
    return {"scenario": ts.scenario, "pair": list(ts.pair), "definite_state": ts.definite_state,
            "checks": ts.checks,
            "rows": [{"t": r.t, "bounds": {n: r.bounds[n].to_dict() for n in BOUND_ORDER}}
                     for r in ts.rows]}


# -- commands --------------------------------------------------------------------

def cmd_run(config_path, out_dir) -> RunManifest:
    start = time.perf_counter()
    cfg = parse_config(config_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ts = run_scenario(cfg)
    files = [out / "timeseries.csv", out / "bounds.json"]
    write_csv(files[0], CSV_COLUMNS, ts.records())
    write_json(files[1], _bounds_document(ts))
    extra = {}
    if cfg.scenario == "peres":
        rep = run_peres(cfg)
        files.append(out / "peres.csv")
        write_csv(files[-1], PERES_COLUMNS, rep.records())
        extra["peres"] = {"alpha_beta_star": rep.alpha_beta_star,
                          "commutator_residual": rep.commutator_residual,
                          "decay_threshold": rep.decay_threshold,
                          "decay_time": rep.decay_time, "min_abs_z": rep.min_abs_z,
                          "max_a_residual": max(r.a_residual for r in rep.rows),
                          "max_a_prime_residual": max(r.a_prime_residual for r in rep.rows)}
    code = EXIT_VIOLATED if ts.any_violation() else EXIT_OK
    files.append(out / "manifest.json")
    manifest = RunManifest("run", str(config_path), cfg.to_dict(), __version__,
                           time.perf_counter() - start, [str(f) for f in files], cfg.seed,
                           code, extra)
    write_json(files[-1], manifest.to_dict())
    return manifest


def parse_axis(axis: str) -> tuple:
    """``FIELD:START:STOP:COUNT`` -> (field, values)."""
    parts = axis.split(":")
    if len(parts) != 4:
        raise ConfigurationError(f"axis {axis!r}: expected FIELD:START:STOP:COUNT")
    name, start, stop, count = parts
    try:
        start, stop, count = float(start), float(stop), int(count)
    except ValueError:
        raise ConfigurationError(f"axis {axis!r}: START, STOP must be numbers and COUNT an integer") from None
    if count < 2:
        raise ConfigurationError(f"axis {axis!r}: COUNT must be at least 2")
    return name, np.linspace(start, stop, count)


def _sweep_point(raw: dict):
    cfg = config_from_dict(raw)
    ts = run_scenario(cfg)
    return ts.records(), ts.any_violation()


def cmd_sweep(config_path, axis: str, out_dir, jobs: int = 1) -> RunManifest:
    start = time.perf_counter()
    base = parse_config(config_path)
    raw = json.loads(Path(config_path).read_text())
    name, values = parse_axis(axis)
    configs = [set_field(raw, name, float(v)) for v in values]
    for c in configs:
        config_from_dict(c)  # fail before any work is done
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_point, configs))
    else:
        results = [_sweep_point(c) for c in configs]

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    key = name.replace(".", "_")
    rows = [{key: float(v), **rec} for v, (recs, _) in zip(values, results) for rec in recs]
    files = [out / "sweep.csv", out / "manifest.json"]
    write_csv(files[0], (key,) + CSV_COLUMNS, rows)
    code = EXIT_VIOLATED if any(bad for _, bad in results) else EXIT_OK
    manifest = RunManifest("sweep", str(config_path), base.to_dict(), __version__,
                           time.perf_counter() - start, [str(f) for f in files], base.seed, code,
                           {"axis": {"field": name, "values": values.tolist()}, "jobs": jobs})
    write_json(files[1], manifest.to_dict())
    return manifest


def cmd_falsify(trials: int, seed: int, out_dir) -> RunManifest:
    start = time.perf_counter()
    if trials < 1:
        raise ConfigurationError(f"--trials must be at least 1, got {trials}")
    reports = run_all(trials, seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = [out / "falsifier_report.json", out / "manifest.json"]
    write_json(files[0], {"trials": trials, "seed": seed,
                          "reports": {k: r.to_dict() for k, r in reports.items()}})
    code = EXIT_VIOLATED if reports["uncertainty"].violations else EXIT_OK
    manifest = RunManifest("falsify", "", {"trials": trials, "seed": seed}, __version__,
                           time.perf_counter() - start, [str(f) for f in files], seed, code)
    write_json(files[1], manifest.to_dict())
    return manifest


# -- entry point -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="macrophase",
                                     description="Relative-phase bounds for measured macroscopic branches.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--jobs", type=int, default=1, help="parallel sweep sub-runs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one scenario config")
    p.add_argument("config")
    p.add_argument("--out", default="out")

    p = sub.add_parser("sweep", help="scan one numeric config field")
    p.add_argument("config")
    p.add_argument("--axis", required=True, help="FIELD:START:STOP:COUNT (FIELD may be alpha2)")
    p.add_argument("--out", default="out")
    p.add_argument("--jobs", type=int, default=argparse.SUPPRESS)

    p = sub.add_parser("falsify", help="Monte-Carlo census of the inequalities")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="out")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            manifest = cmd_run(args.config, args.out)
        elif args.command == "sweep":
            manifest = cmd_sweep(args.config, args.axis, args.out, max(1, args.jobs))
        else:
            manifest = cmd_falsify(args.trials, args.seed, args.out)
    except (MacrophaseError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_ERROR
    print(json.dumps({"exit_code": manifest.exit_code, "outputs": manifest.outputs}))
    return manifest.exit_code


if __name__ == "__main__":
    sys.exit(main())
