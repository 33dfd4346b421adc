"""
Monte-Carlo stress tests of the uncertainty relation, the triangle inequality
of the D-distance and the sign of the bound right-hand sides.

Every trial draws from its own generator ``default_rng([seed, trial, stream])``
so a report depends only on ``(trials, seed)`` and replays bit-for-bit.
"""
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import bounds as B
from .composite import CompositeState, overlap_factor
from .errors import ConfigurationError, DegenerateVectorError, GeometryError
from .pointer import Grid, gaussian_packet, make_grid

UNCERTAINTY_TOLERANCE = 1e-10
HIST_BINS = 64
HIST_RANGE = (-1.0, 1.0)
CENSUS_TOLERANCES = (1e-12, 1e-10, 1e-8, 1e-6)
CENSUS_BOUNDS = ("eq11", "eq16", "eq18", "eq24", "eq25")
MAX_RETRIES = 32

_STREAM_NORMALIZED, _STREAM_UNNORMALIZED, _STREAM_RANDOM, _STREAM_TWO_BRANCH = 0, 1, 2, 3


def default_grid() -> Grid:
    return make_grid(128, -20.0, 20.0)


def slack_histogram(slacks) -> list:
    """Counts in ``HIST_BINS`` equal bins over ``HIST_RANGE``; outliers land in the end bins."""
    s = np.clip(np.asarray(slacks, dtype=float), *HIST_RANGE)
    counts, _ = np.histogram(s, bins=HIST_BINS, range=HIST_RANGE)
    return counts.tolist()


@dataclass
class FalsifierReport:
    name: str
    seed: int
    trials: int
    violations: int
    max_violation_magnitude: float
    tolerance: float
    histogram: list
    breakdown: dict = field(default_factory=dict)
    skipped: int = 0
    note: str = ""

    def __post_init__(self):
        if self.violations > self.trials:
            raise ValueError("violations cannot exceed trials")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["histogram"] = {"bins": HIST_BINS, "range": list(HIST_RANGE), "counts": self.histogram}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _trial_rng(seed: int, trial: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial, stream])


def _require_trials(trials: int):
    if isinstance(trials, bool) or not isinstance(trials, (int, np.integer)) or trials < 1:
        raise ConfigurationError(f"trials must be a positive integer, got {trials!r}")


def _random_mixture(rng, grid: Grid) -> np.ndarray:
    amp = np.zeros(grid.n_points, dtype=complex)
    for _ in range(rng.integers(1, 4)):
        w = complex(rng.normal(), rng.normal())
        packet = gaussian_packet(grid, rng.uniform(-3, 3), rng.uniform(0.8, 1.5), rng.uniform(-1, 1))
        amp += w * packet.amplitudes
    n2 = np.sum(np.abs(amp) ** 2) * grid.dq
    if n2 < 1e-6:
        raise GeometryError("mixture cancelled")
    return amp / np.sqrt(n2)


def _draw_composite(rng, n_branches, grid, normalized) -> CompositeState:
    c = rng.normal(size=n_branches) + 1j * rng.normal(size=n_branches)
    c /= np.linalg.norm(c)
    if not normalized:
        c *= np.sqrt(rng.uniform(0.0, 2.0) or 2.0)
    L = rng.uniform(0.0, 3.0)
    eig = rng.uniform(-1.5, 1.5, size=n_branches)
    frame = np.array([_random_mixture(rng, grid) for _ in range(n_branches)])
    state = CompositeState(grid, tuple(range(n_branches)), c, eig, L, frame, normalized=normalized)
    state.lab_waves(check=True)
    return state


def sample_random_composite(seed, n_branches: int, grid: Grid = None,
                            normalized: bool = True) -> CompositeState:
    """Random branch state with independent random pointer waves per branch.

    Coefficients are uniform on the complex unit sphere; unnormalized states get
    ``sum |c_n|^2`` uniform in (0, 2]. ``seed`` may be an int, a sequence of ints
    or a ``numpy.random.Generator``. Draws violating the grid margins are
    retried up to ``MAX_RETRIES`` times.
    """
    if n_branches < 2:
        raise ConfigurationError(f"n_branches must be at least 2, got {n_branches}")
    grid = grid or default_grid()
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    for _ in range(MAX_RETRIES):
        try:
            return _draw_composite(rng, n_branches, grid, normalized)
        except GeometryError:
            continue
    raise GeometryError(f"no margin-respecting draw in {MAX_RETRIES} attempts; widen the grid")


def _pair_quantities(state: CompositeState):
    pair = state.pair(0, 1)
    ci, cj = state.coefficients[0], state.coefficients[1]
    z = B.OverlapZ(overlap_factor(state, pair))
    try:
        phi = B.relative_phase(ci, cj, z)
    except B.UndefinedPhaseError:
        phi = 0.0
    return pair, abs(ci) ** 2, abs(cj) ** 2, z, phi


def _summary(slacks, tol):
    slacks = np.asarray(slacks, dtype=float)
    bad = slacks < -tol
    worst = float(-slacks[bad].min()) if bad.any() else 0.0
    return int(bad.sum()), worst


# -- uncertainty relation ----------------------------------------------------------

def falsify_uncertainty(trials: int, seed: int, grid: Grid = None) -> FalsifierReport:
    """``var1 var2 >= <[A1, A2]>^2 / 4`` on random states; even trials normalized, odd not."""
    _require_trials(trials)
    grid = grid or default_grid()
    slacks = {True: [], False: []}
    for k in range(trials):
        normalized = k % 2 == 0
        stream = _STREAM_NORMALIZED if normalized else _STREAM_UNNORMALIZED
        rng = _trial_rng(seed, k, stream)
        state = sample_random_composite(rng, int(rng.integers(2, 5)), grid, normalized)
        i, j = rng.choice(state.n_branches, size=2, replace=False)
        var1, var2, comm = B.uncertainty_terms(state, state.pair(int(i), int(j)))
        slacks[normalized].append(var1 * var2 - 0.25 * comm * comm)

    breakdown = {}
    for normalized, label in ((True, "normalized"), (False, "unnormalized")):
        v, worst = _summary(slacks[normalized], UNCERTAINTY_TOLERANCE)
        breakdown[label] = {"trials": len(slacks[normalized]), "violations": v,
                            "max_violation_magnitude": worst,
                            "min_slack": float(min(slacks[normalized], default=np.nan))}
    every = slacks[True] + slacks[False]
    v, worst = _summary(every, UNCERTAINTY_TOLERANCE)
    return FalsifierReport("uncertainty", seed, trials, v, worst, UNCERTAINTY_TOLERANCE,
                           slack_histogram(every), breakdown)


# -- triangle inequality -----------------------------------------------------------

def _triangle_slack(a, b, c) -> float:
    d12, d23, d13 = B.fubini_study_D(a, b), B.fubini_study_D(b, c), B.fubini_study_D(a, c)
    return d12 + d23 - d13


def falsify_triangle(trials: int, seed: int, grid: Grid = None,
                     random_dim: int = 8) -> FalsifierReport:
    """``D12 + D23 >= D13`` on two populations of ``trials`` triples each.

    ``structured``: ``(Psi, A1 Psi, A2 Psi)`` for random branch states.
    ``random``: a chain ``v1 = v0 + e1 n1``, ``v2 = v1 + e2 n2`` of complex Gaussian
    vectors of size ``random_dim`` with log-uniform steps ``e`` in [1e-2, 10], so
    nearly aligned and nearly orthogonal triples both occur.
    Triples with a vanishing vector are skipped and counted.
    """
    _require_trials(trials)
    grid = grid or default_grid()
    populations = {"structured": [], "random": []}
    skipped = {"structured": 0, "random": 0}
    for k in range(trials):
        rng = _trial_rng(seed, k, _STREAM_NORMALIZED)
        state = sample_random_composite(rng, int(rng.integers(2, 5)), grid, True)
        i, j = rng.choice(state.n_branches, size=2, replace=False)
        try:
            d = B.distances_triple(state, state.pair(int(i), int(j)))
            populations["structured"].append(d.d12 + d.d23 - d.d13)
        except DegenerateVectorError:
            skipped["structured"] += 1

        rng = _trial_rng(seed, k, _STREAM_RANDOM)
        vecs = rng.normal(size=(3, random_dim)) + 1j * rng.normal(size=(3, random_dim))
        steps = 10.0 ** rng.uniform(-2, 1, size=2)
        vecs[1] = vecs[0] + steps[0] * vecs[1]
        vecs[2] = vecs[1] + steps[1] * vecs[2]
        try:
            populations["random"].append(_triangle_slack(*vecs))
        except DegenerateVectorError:
            skipped["random"] += 1

    breakdown = {}
    for name, slacks in populations.items():
        v, worst = _summary(slacks, B.VERDICT_TOL)
        breakdown[name] = {"trials": trials, "evaluated": len(slacks), "skipped": skipped[name],
                           "violations": v, "violation_rate": v / max(len(slacks), 1),
                           "max_violation_magnitude": worst,
                           "histogram": slack_histogram(slacks)}
    every = populations["structured"] + populations["random"]
    v, worst = _summary(every, B.VERDICT_TOL)
    return FalsifierReport("triangle", seed, 2 * trials, v, worst, B.VERDICT_TOL,
                           slack_histogram(every), breakdown, sum(skipped.values()),
                           note="D is the squared sine of the Fubini-Study angle; "
                                "no outcome is assumed")


# -- right-hand-side sign census ---------------------------------------------------

def census_rhs(ci2, cj2, z: B.OverlapZ, phi) -> dict:
    """Right-hand sides of the census bounds (NaN where undefined)."""
    out = {"eq11": B.bound_uncertainty(ci2, cj2, z, phi).rhs,
           "eq16": B.bound_tight(ci2, cj2, z, phi).rhs,
           "eq18": B.bound_post_measurement(ci2, cj2, z, phi).rhs}
    return {k: float(v) for k, v in out.items()}


def _census_two_branch(alpha2, beta2, z, phi) -> dict:
    return {"eq24": float(B.bound_uncertainty_sg(alpha2, beta2, z, phi).rhs),
            "eq25": float(B.bound_tight_sg(alpha2, beta2, z, phi).rhs)}


def _fractions(values: dict) -> dict:
    out = {}
    for name, vals in values.items():
        v = np.asarray(vals, dtype=float)
        v = v[np.isfinite(v)]
        out[name] = {"evaluated": int(v.size),
                     "max_rhs": float(v.max()) if v.size else float("nan"),
                     "positive_fraction": {f"{tol:g}": float(np.mean(v > tol)) if v.size else 0.0
                                           for tol in CENSUS_TOLERANCES}}
    return out


def bound_sign_census(trials: int, seed: int, grid: Grid = None, s_bins: int = 8,
                      z_bins: int = 8) -> FalsifierReport:
    """Sign statistics of the bound right-hand sides.

    Normalized states: general 2-4 branch states for eq11/eq16/eq18 and
    two-branch states for eq24/eq25; a positive right-hand side beyond 1e-12
    counts as a violation of the sign analysis. Unnormalized states: the
    fraction with positive eq11 right-hand side on an (S, |Z|^2) grid.
    """
    _require_trials(trials)
    grid = grid or default_grid()
    normalized = {name: [] for name in CENSUS_BOUNDS}
    unnormalized = {name: [] for name in CENSUS_BOUNDS[:3]}
    s_edges = np.linspace(0.0, 2.0, s_bins + 1)
    z_edges = np.linspace(0.0, 1.0, z_bins + 1)
    hits = np.zeros((s_bins, z_bins), dtype=int)
    totals = np.zeros((s_bins, z_bins), dtype=int)

    for k in range(trials):
        rng = _trial_rng(seed, k, _STREAM_NORMALIZED)
        _, ci2, cj2, z, phi = _pair_quantities(
            sample_random_composite(rng, int(rng.integers(2, 5)), grid, True))
        for name, v in census_rhs(ci2, cj2, z, phi).items():
            normalized[name].append(v)

        rng = _trial_rng(seed, k, _STREAM_TWO_BRANCH)
        _, a2, b2, z, phi = _pair_quantities(sample_random_composite(rng, 2, grid, True))
        for name, v in _census_two_branch(a2, b2, z, phi).items():
            normalized[name].append(v)

        rng = _trial_rng(seed, k, _STREAM_UNNORMALIZED)
        _, ci2, cj2, z, phi = _pair_quantities(
            sample_random_composite(rng, int(rng.integers(2, 5)), grid, False))
        rhs = census_rhs(ci2, cj2, z, phi)
        for name, v in rhs.items():
            unnormalized[name].append(v)
        si = min(int(np.searchsorted(s_edges, ci2 + cj2, side="right")) - 1, s_bins - 1)
        zi = min(int(np.searchsorted(z_edges, z.magnitude ** 2, side="right")) - 1, z_bins - 1)
        totals[si, zi] += 1
        hits[si, zi] += int(rhs["eq11"] > CENSUS_TOLERANCES[0])

    norm_stats = _fractions(normalized)
    violations = max(round(s["positive_fraction"][f"{CENSUS_TOLERANCES[0]:g}"] * s["evaluated"])
                     for s in norm_stats.values())
    worst = max(max(s["max_rhs"], 0.0) for s in norm_stats.values())
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(totals > 0, hits / np.maximum(totals, 1), np.nan)
    breakdown = {
        "normalized": norm_stats,
        "unnormalized": _fractions(unnormalized),
        "unnormalized_eq11_map": {"s_edges": s_edges.tolist(), "z2_edges": z_edges.tolist(),
                                  "counts": totals.tolist(),
                                  "positive_fraction": [[None if np.isnan(x) else float(x) for x in row]
                                                        for row in frac]},
    }
    eq11 = np.asarray(normalized["eq11"], dtype=float)
    return FalsifierReport("bound_sign_census", seed, trials, int(violations), worst,
                           CENSUS_TOLERANCES[0], slack_histogram(-eq11[np.isfinite(eq11)]),
                           breakdown,
                           note="histogram: minus the eq11 right-hand side on normalized states")


def run_all(trials: int, seed: int) -> dict:
    """All three studies, as used by ``macrophase falsify``."""
    return {"uncertainty": falsify_uncertainty(trials, seed),
            "triangle": falsify_triangle(trials, seed),
            "bound_sign_census": bound_sign_census(trials, seed)}
