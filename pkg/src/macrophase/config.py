"""
Scenario configuration: JSON schema, defaults and validation.

Schema (unknown keys are rejected at every level)::

    {
      "scenario": "general" | "stern_gerlach" | "peres",
      "grid": {"n_points": int, "q_min": float, "q_max": float},
      "mass": float,                                   # default 1
      "potential": {"kind": str, "params": [float]},   # default {"kind": "none"}
      "packet": {"center": float, "width": float, "momentum": float},
      "branches": [{"c_re": float, "c_im": float, "eigenvalue": float}],
      "coupling_length": float,
      "times": [float],                                # default [0]
      "pair": [int, int],
      "seed": int,
      "falsifier_mode": bool,
      "dt": float | null,                              # null: automatic
      "decay_threshold": float,                        # peres only
      "system_field": float                            # H_s = system_field * O
    }

For ``stern_gerlach`` and ``peres`` the two branches are spin up (label 0,
amplitude alpha) and spin down (label 1, amplitude beta); eigenvalues default
to +1/2 and -1/2 and ``coupling_length`` is the pointer displacement ``L`` of
each branch (up moves to +L, down to -L). The default pair is (1, 0) so that
``<A1> + i<A2> = alpha beta^* Z``.
"""
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .composite import BranchSpec, CompositeState, couple
from .dynamics import ApparatusHamiltonian, PropagatorConfig
from .errors import ConfigurationError, GeometryError
from .pointer import Grid, PointerWave, gaussian_packet, make_grid

SCENARIOS = ("general", "stern_gerlach", "peres")


@dataclass(frozen=True)
class GridSpec:
    n_points: int
    q_min: float
    q_max: float


@dataclass(frozen=True)
class PotentialSpec:
    kind: str = "none"
    params: tuple = ()


@dataclass(frozen=True)
class PacketSpec:
    center: float = 0.0
    width: float = 1.0
    momentum: float = 0.0


@dataclass(frozen=True)
class BranchConfig:
    c_re: float
    c_im: float = 0.0
    eigenvalue: Optional[float] = None

    @property
    def coefficient(self) -> complex:
        return complex(self.c_re, self.c_im)


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    grid: GridSpec
    branches: tuple
    coupling_length: float
    mass: float = 1.0
    potential: PotentialSpec = field(default_factory=PotentialSpec)
    packet: PacketSpec = field(default_factory=PacketSpec)
    times: tuple = (0.0,)
    pair: Optional[tuple] = None
    seed: int = 0
    falsifier_mode: bool = False
    dt: Optional[float] = None
    decay_threshold: float = 0.1
    system_field: float = 0.0

    @property
    def is_spin(self) -> bool:
        return self.scenario in ("stern_gerlach", "peres")

    @property
    def labels(self) -> tuple:
        return tuple(range(len(self.branches)))

    @property
    def eigenvalues(self) -> tuple:
        out = []
        for k, b in enumerate(self.branches):
            if b.eigenvalue is not None:
                out.append(float(b.eigenvalue))
            elif self.is_spin:
                out.append(0.5 if k == 0 else -0.5)
            else:
                raise ConfigurationError(f"branches[{k}].eigenvalue is required")
        return tuple(out)

    @property
    def resolved_pair(self) -> tuple:
        if self.pair is not None:
            return tuple(self.pair)
        return (1, 0) if self.is_spin else (0, 1)

    @property
    def effective_coupling(self) -> float:
        """Coupling length in ``L_n = L * O_n``; spin runs displace by ``2 L s_z``."""
        return 2 * self.coupling_length if self.is_spin else self.coupling_length

    def build_grid(self) -> Grid:
        return make_grid(self.grid.n_points, self.grid.q_min, self.grid.q_max)

    def build_hamiltonian(self) -> ApparatusHamiltonian:
        return ApparatusHamiltonian(self.mass, self.potential.kind, tuple(self.potential.params))

    def build_packet(self) -> PointerWave:
        p = self.packet
        return gaussian_packet(self.build_grid(), p.center, p.width, p.momentum)

    def branch_specs(self) -> list:
        return [BranchSpec(lab, b.coefficient, o)
                for lab, b, o in zip(self.labels, self.branches, self.eigenvalues)]

    def build_state(self) -> CompositeState:
        return couple(self.branch_specs(), self.effective_coupling, self.build_packet(),
                      normalized=not self.falsifier_mode)

    def propagator(self) -> PropagatorConfig:
        return PropagatorConfig(dt=self.dt)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["potential"]["params"] = list(self.potential.params)
        d["times"] = list(self.times)
        d["branches"] = [asdict(b) for b in self.branches]
        d["pair"] = list(self.resolved_pair)
        return d


_TOP_KEYS = {f.name for f in fields(ScenarioConfig)}


def _reject_unknown(obj: dict, allowed, where: str):
    if not isinstance(obj, dict):
        raise ConfigurationError(f"{where or 'config'}: expected an object, got {type(obj).__name__}")
    extra = sorted(set(obj) - set(allowed))
    if extra:
        raise ConfigurationError(f"{where or 'config'}: unknown key(s) {', '.join(map(repr, extra))}")


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{where}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigurationError(f"{where}: must be finite")
    return float(value)


def _integer(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigurationError(f"{where}: expected an integer, got {value!r}")
    return value


def _sub(cls, raw, where, required=()):
    allowed = [f.name for f in fields(cls)]
    _reject_unknown(raw, allowed, where)
    for key in required:
        if key not in raw:
            raise ConfigurationError(f"{where}.{key}: required")
    return raw


def config_from_dict(raw: dict) -> ScenarioConfig:
    """Validate a parsed JSON object and apply defaults."""
    _reject_unknown(raw, _TOP_KEYS, "")
    for key in ("scenario", "grid", "branches", "coupling_length"):
        if key not in raw:
            raise ConfigurationError(f"{key}: required")
    scenario = raw["scenario"]
    if scenario not in SCENARIOS:
        raise ConfigurationError(f"scenario: must be one of {SCENARIOS}, got {scenario!r}")

    g = _sub(GridSpec, raw["grid"], "grid", ("n_points", "q_min", "q_max"))
    grid = GridSpec(_integer(g["n_points"], "grid.n_points"), _number(g["q_min"], "grid.q_min"),
                    _number(g["q_max"], "grid.q_max"))

    pot_raw = _sub(PotentialSpec, raw.get("potential", {}), "potential")
    params = pot_raw.get("params", [])
    if not isinstance(params, list):
        raise ConfigurationError("potential.params: expected a list")
    potential = PotentialSpec(pot_raw.get("kind", "none"),
                              tuple(_number(x, f"potential.params[{k}]") for k, x in enumerate(params)))

    pk = _sub(PacketSpec, raw.get("packet", {}), "packet")
    packet = PacketSpec(**{k: _number(v, f"packet.{k}") for k, v in pk.items()})

    if not isinstance(raw["branches"], list) or not raw["branches"]:
        raise ConfigurationError("branches: expected a non-empty list")
    branches = []
    for k, b in enumerate(raw["branches"]):
        b = _sub(BranchConfig, b, f"branches[{k}]", ("c_re",))
        ev = b.get("eigenvalue")
        branches.append(BranchConfig(_number(b["c_re"], f"branches[{k}].c_re"),
                                     _number(b.get("c_im", 0.0), f"branches[{k}].c_im"),
                                     None if ev is None else _number(ev, f"branches[{k}].eigenvalue")))

    times = raw.get("times", [0.0])
    if not isinstance(times, list) or not times:
        raise ConfigurationError("times: expected a non-empty list")
    times = tuple(_number(t, f"times[{k}]") for k, t in enumerate(times))
    if times[0] < 0 or any(b <= a for a, b in zip(times, times[1:])):
        raise ConfigurationError("times: must be strictly ascending and start at t >= 0")

    pair = raw.get("pair")
    if pair is not None:
        if not isinstance(pair, list) or len(pair) != 2:
            raise ConfigurationError("pair: expected [i, j]")
        pair = (_integer(pair[0], "pair[0]"), _integer(pair[1], "pair[1]"))

    falsifier_mode = raw.get("falsifier_mode", False)
    if not isinstance(falsifier_mode, bool):
        raise ConfigurationError("falsifier_mode: expected a boolean")
    dt = raw.get("dt")
    cfg = ScenarioConfig(
        scenario=scenario,
        grid=grid,
        branches=tuple(branches),
        coupling_length=_number(raw["coupling_length"], "coupling_length"),
        mass=_number(raw.get("mass", 1.0), "mass"),
        potential=potential,
        packet=packet,
        times=times,
        pair=pair,
        seed=_integer(raw.get("seed", 0), "seed"),
        falsifier_mode=falsifier_mode,
        dt=None if dt is None else _number(dt, "dt"),
        decay_threshold=_number(raw.get("decay_threshold", 0.1), "decay_threshold"),
        system_field=_number(raw.get("system_field", 0.0), "system_field"),
    )
    validate(cfg)
    return cfg


def validate(cfg: ScenarioConfig) -> None:
    """Physics checks: normalization, branch structure, pair, grid geometry."""
    n = len(cfg.branches)
    if cfg.is_spin and n != 2:
        raise ConfigurationError(f"branches: {cfg.scenario} needs exactly two branches (alpha, beta), got {n}")
    if n < 2 and cfg.pair is not None:
        raise ConfigurationError("pair: a phase pair needs at least two branches")
    norm = sum(abs(b.coefficient) ** 2 for b in cfg.branches)
    if not cfg.falsifier_mode and abs(norm - 1) > 1e-8:
        raise ConfigurationError(
            f"branches: sum |c_n|^2 = {norm:.10g}, must be 1 (normalization); set "
            "falsifier_mode to study unnormalized states")
    if n >= 2:
        i, j = cfg.resolved_pair
        if i == j or not (0 <= i < n and 0 <= j < n):
            raise ConfigurationError(f"pair: labels must be distinct indices into branches, got {[i, j]}")
    if cfg.decay_threshold <= 0:
        raise ConfigurationError("decay_threshold: must be positive")
    try:
        cfg.build_hamiltonian()
        cfg.eigenvalues
        if cfg.dt is not None:
            cfg.propagator()
        cfg.build_state()
    except GeometryError as exc:
        raise ConfigurationError(f"geometry: {exc}; widen the grid or shorten coupling_length") from exc


def parse_config(path) -> ScenarioConfig:
    """Read and validate a JSON scenario file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(raw)


def set_field(raw: dict, dotted: str, value: float) -> dict:
    """Copy of ``raw`` with a numeric field replaced; ``alpha2`` sets |alpha|^2 of a
    two-branch config keeping both phases."""
    out = json.loads(json.dumps(raw))
    if dotted == "alpha2":
        b = out["branches"]
        if len(b) != 2:
            raise ConfigurationError("axis alpha2 needs exactly two branches")
        for k, prob in ((0, value), (1, 1.0 - value)):
            ph = np.angle(complex(b[k]["c_re"], b[k].get("c_im", 0.0)))
            b[k]["c_re"] = float(np.sqrt(prob) * np.cos(ph))
            b[k]["c_im"] = float(np.sqrt(prob) * np.sin(ph))
        return out
    node = out
    keys = dotted.split(".")
    if len(keys) >= 2 and keys[-1].isdigit():
        # list entry, e.g. potential.params.0
        parent = out
        for key in keys[:-2]:
            parent = parent.get(key) if isinstance(parent, dict) else None
        seq = parent.get(keys[-2]) if isinstance(parent, dict) else None
        idx = int(keys[-1])
        if not isinstance(seq, list) or idx >= len(seq):
            raise ConfigurationError(f"axis {dotted!r}: no such field")
        if isinstance(seq[idx], bool) or not isinstance(seq[idx], (int, float)):
            raise ConfigurationError(f"axis {dotted!r}: field is not numeric")
        seq[idx] = float(value)
        return out
    for depth, key in enumerate(keys[:-1]):
        if isinstance(node, dict) and key not in node and depth == 0 and key in _OPTIONAL_SECTIONS:
            node[key] = {}
        if not isinstance(node, dict) or key not in node:
            raise ConfigurationError(f"axis {dotted!r}: no such field")
        node = node[key]
    leaf = keys[-1]
    if not isinstance(node, dict) or leaf not in node and leaf not in _defaults_for(keys):
        raise ConfigurationError(f"axis {dotted!r}: no such field")
    current = node.get(leaf)
    if current is None and leaf in _defaults_for(keys):
        current = 0.0
    if isinstance(current, bool) or not isinstance(current, (int, float)):
        raise ConfigurationError(f"axis {dotted!r}: field is not numeric")
    node[leaf] = int(round(value)) if isinstance(current, int) and dotted == "grid.n_points" else float(value)
    return out


_OPTIONAL_SECTIONS = {"packet", "potential"}


def _defaults_for(keys) -> set:
    if len(keys) == 1:
        return {"mass", "dt", "decay_threshold", "system_field", "seed"}
    if keys[0] == "packet":
        return {"center", "width", "momentum"}
    return set()
