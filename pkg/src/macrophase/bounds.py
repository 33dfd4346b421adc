"""
Overlap factor, relative phase, Fubini-Study distances and the phase bounds.

Notation used throughout::

    ci2, cj2   branch probabilities |c_i|^2, |c_j|^2
    S = ci2 + cj2,  P = ci2 * cj2
    z2 = |Z|^2

Every bound is returned as a :class:`BoundReport` whose ``slack`` is oriented
so that ``slack >= 0`` means the inequality holds. A bound whose denominator
drops below ``DEGENERATE`` is reported as ``"undefined"``; no exception.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .composite import (CompositeState, PhasePair, _unit_overlap, apply_a1, apply_a2,
                        vector_inner)
from .dynamics import ApparatusHamiltonian, PropagatorConfig, evolve_rows, shifted, check_rows
from .errors import DegenerateVectorError, UndefinedPhaseError
from .pointer import PointerWave, translate

DEGENERATE = 1e-14
#: Slack below zero but above ``-VERDICT_TOL`` still counts as satisfied (rounding).
VERDICT_TOL = 1e-12

SATISFIED, VIOLATED, UNDEFINED = "satisfied", "violated", "undefined"


@dataclass(frozen=True)
class OverlapZ:
    """``Z_ij(t) = |Z| exp(i theta)``."""

    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))
        if abs(self.value) > 1 + 1e-10:
            raise ValueError(f"|Z| = {abs(self.value)} exceeds 1")

    @property
    def magnitude(self) -> float:
        return abs(self.value)

    @property
    def phase(self) -> float:
        return _principal(np.angle(self.value))


def _principal(angle: float) -> float:
    """Map to (-pi, pi]."""
    a = float(angle)
    return np.pi if a == -np.pi else a


@dataclass(frozen=True)
class BoundReport:
    name: str
    lhs: float
    rhs: float
    slack: float
    verdict: str
    inputs: dict = field(default_factory=dict)
    note: str = ""
    raw: Optional["BoundReport"] = None

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("name", "lhs", "rhs", "slack", "verdict", "inputs", "note")}
        d["raw"] = self.raw.to_dict() if self.raw is not None else None
        return d


@dataclass(frozen=True)
class FSDistances:
    d12: float
    d23: float
    d13: float

    def as_tuple(self):
        return self.d12, self.d23, self.d13


def _verdict(slack: float, defined: bool = True) -> str:
    if not defined or not np.isfinite(slack):
        return UNDEFINED
    return SATISFIED if slack >= -VERDICT_TOL else VIOLATED


def _report(name, lhs, rhs, defined, inputs, sense=1, note="", raw=None) -> BoundReport:
    if not defined:
        rhs = float("nan")
    slack = sense * (lhs - rhs)
    return BoundReport(name, float(lhs), float(rhs), float(slack), _verdict(slack, defined),
                       inputs, note, raw)


# -- Z and the relative phase ---------------------------------------------------

def overlap_Z(initial: PointerWave, h: ApparatusHamiltonian, L_i: float, L_j: float, t: float,
              cfg: PropagatorConfig = None) -> OverlapZ:
    """``<psi| exp(itH(q+L_i)) exp(-itH(q+L_j)) |psi>`` from two shifted evolutions."""
    if t == 0:
        return OverlapZ(1.0)
    g = initial.grid
    rows = evolve_rows(g, [initial.amplitudes, initial.amplitudes],
                       [shifted(h, L_i), shifted(h, L_j)], t, cfg)
    check_rows(g, rows, np.array([initial.norm2, initial.norm2]))
    return OverlapZ(_unit_overlap(rows[0], rows[1]))


def overlap_Z_lab(initial: PointerWave, h: ApparatusHamiltonian, L_i: float, L_j: float, t: float,
                  cfg: PropagatorConfig = None) -> OverlapZ:
    """Same quantity read off ``<A1> + i<A2>`` of an equal-weight two-branch state
    evolved in the lab frame under the unshifted ``h``."""
    g = initial.grid
    shifts = np.array([L_i, L_j])
    chi = np.array([translate(initial, L).amplitudes for L in shifts])
    if t != 0:
        chi = evolve_rows(g, chi, [h, h], t, cfg)
        check_rows(g, chi, np.ones(2))
    c = np.array([1.0, 1.0]) / np.sqrt(2)
    vec = c[:, None] * chi
    a1 = vector_inner(g, vec, apply_a1(g, vec, shifts, 0, 1)).real
    a2 = vector_inner(g, vec, apply_a2(g, vec, shifts, 0, 1)).real
    z = (a1 + 1j * a2) / (c[0] * c[1])
    if abs(z) > 1:
        z /= abs(z)
    return OverlapZ(z)


def relative_phase(c_i: complex, c_j: complex, z: OverlapZ) -> float:
    """``Phi_ij = arg(c_i^* c_j Z_ij)`` in (-pi, pi]."""
    if min(abs(c_i), abs(c_j), z.magnitude) <= DEGENERATE:
        raise UndefinedPhaseError("relative phase undefined: a branch amplitude or |Z| vanishes")
    return _principal(np.angle(np.conj(c_i) * c_j * z.value))


# -- right-hand sides -------------------------------------------------------------

def uncertainty_rhs(S: float, P: float, z2: float) -> float:
    """``(S z2 - 1) / (P z2^2)``."""
    return (S * z2 - 1.0) / (P * z2 * z2)


def triangle_rhs(S: float, z2: float) -> float:
    return 1.0 / (z2 * S)


def tight_rhs(S: float, P: float, z2: float) -> float:
    """``(1/2) (z2 S - 1)/(z2 S + 1) * S / (P z2)``."""
    return 0.5 * ((z2 * S - 1.0) / (z2 * S + 1.0)) * S / (P * z2)


def post_measurement_rhs(S: float, P: float, z2: float) -> float:
    return 0.5 * ((S - 1.0) / (S + 1.0)) * S / (P * z2)


def _inputs(ci2, cj2, z, phi):
    return {"ci2": float(ci2), "cj2": float(cj2), "abs_z": z.magnitude, "phi": float(phi)}


# -- bounds -----------------------------------------------------------------------

def raw_uncertainty(var1: float, var2: float, comm: float) -> BoundReport:
    """``var1 var2 >= |<[A1, A2]>|^2 / 4`` with ``<[A1,A2]> = i comm``."""
    return _report("eq8", var1 * var2, 0.25 * comm * comm, True,
                   {"var1": float(var1), "var2": float(var2), "comm": float(comm)})


def bound_uncertainty(ci2, cj2, z: OverlapZ, phi, moments=None) -> BoundReport:
    """``sin^2(2 Phi) >= (S|Z|^2 - 1)/(P |Z|^4)``.

    ``moments=(var1, var2, comm)`` from a live state attaches the raw
    uncertainty-relation check as ``raw``.
    """
    S, P, z2 = ci2 + cj2, ci2 * cj2, z.magnitude ** 2
    defined = P * z2 * z2 >= DEGENERATE
    rhs = uncertainty_rhs(S, P, z2) if defined else np.nan
    raw = raw_uncertainty(*moments) if moments is not None else None
    return _report("eq11", np.sin(2 * phi) ** 2, rhs, defined, _inputs(ci2, cj2, z, phi), raw=raw)


def bound_uncertainty_sg(alpha2, beta2, z: OverlapZ, phi) -> BoundReport:
    """Two-branch form ``sin^2(2 Phi) >= (|Z|^2 - 1)/(|a|^2 |b|^2 |Z|^4)`` (S = 1)."""
    P, z2 = alpha2 * beta2, z.magnitude ** 2
    defined = P * z2 * z2 >= DEGENERATE
    rhs = uncertainty_rhs(1.0, P, z2) if defined else np.nan
    return _report("eq24", np.sin(2 * phi) ** 2, rhs, defined, _inputs(alpha2, beta2, z, phi))


def bound_triangle(ci2, cj2, z: OverlapZ, phi, distances: FSDistances = None) -> BoundReport:
    """``cos(2 Phi) <= 1/(|Z|^2 S)``; ``distances`` adds the raw triangle check."""
    S, z2 = ci2 + cj2, z.magnitude ** 2
    defined = z2 * S >= DEGENERATE
    rhs = triangle_rhs(S, z2) if defined else np.nan
    raw = None
    if distances is not None:
        d12, d23, d13 = distances.as_tuple()
        raw = _report("eq12", d12 + d23, d13, True, {"d12": d12, "d23": d23, "d13": d13})
    return _report("eq15", np.cos(2 * phi), rhs, defined, _inputs(ci2, cj2, z, phi),
                   sense=-1, raw=raw)


def bound_tight(ci2, cj2, z: OverlapZ, phi) -> BoundReport:
    """``sin^2 Phi >= (1/2) (|Z|^2 S - 1)/(|Z|^2 S + 1) * S/(P |Z|^2)``."""
    S, P, z2 = ci2 + cj2, ci2 * cj2, z.magnitude ** 2
    defined = P * z2 >= DEGENERATE
    rhs = tight_rhs(S, P, z2) if defined else np.nan
    return _report("eq16", np.sin(phi) ** 2, rhs, defined, _inputs(ci2, cj2, z, phi))


def bound_tight_sg(alpha2, beta2, z: OverlapZ, phi) -> BoundReport:
    """Two-branch tightened bound (S = 1)."""
    P, z2 = alpha2 * beta2, z.magnitude ** 2
    defined = P * z2 >= DEGENERATE
    rhs = tight_rhs(1.0, P, z2) if defined else np.nan
    return _report("eq25", np.sin(phi) ** 2, rhs, defined, _inputs(alpha2, beta2, z, phi))


def min_phase(ci2, cj2, z: OverlapZ) -> float:
    """Small-angle minimum ``|Phi|``: the square root of the tightened bound, clamped at 0.

    NaN when the bound is undefined.
    """
    S, P, z2 = ci2 + cj2, ci2 * cj2, z.magnitude ** 2
    if P * z2 < DEGENERATE:
        return float("nan")
    return float(np.sqrt(max(tight_rhs(S, P, z2), 0.0)))


def bound_min_phase(ci2, cj2, z: OverlapZ, phi) -> BoundReport:
    """``Phi^2 >= (Phi^2)_min``."""
    m = min_phase(ci2, cj2, z)
    return _report("eq17", phi * phi, m * m, np.isfinite(m), _inputs(ci2, cj2, z, phi),
                   note="small-angle form")


def bound_post_measurement(ci2, cj2, z_later: OverlapZ, phi0) -> BoundReport:
    """``sin^2 phi >= (1/2)(S - 1)/(S + 1) * S/(P |Z(t)|^2)`` in the just-coupled state.

    ``phi0`` is ``arg(c_i^* c_j)``. This form keeps ``|Z(t)|^2`` in the
    denominator; the ``Z = 1`` value is stored as ``inputs["rhs_z1"]``.
    """
    S, P, z2 = ci2 + cj2, ci2 * cj2, z_later.magnitude ** 2
    defined = P * z2 >= DEGENERATE
    rhs = post_measurement_rhs(S, P, z2) if defined else np.nan
    inputs = _inputs(ci2, cj2, z_later, phi0)
    inputs["rhs_z1"] = post_measurement_rhs(S, P, 1.0) if P >= DEGENERATE else float("nan")
    return _report("eq18", np.sin(phi0) ** 2, rhs, defined, inputs)


# -- Fubini-Study -----------------------------------------------------------------

def fubini_study_D(a, b) -> float:
    """``1 - |<a|b>|^2 / (|a|^2 |b|^2)`` for vectors of any shape."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    na, nb = np.vdot(a, a).real, np.vdot(b, b).real
    if na <= DEGENERATE or nb <= DEGENERATE:
        raise DegenerateVectorError("Fubini-Study distance of a zero vector")
    d = 1.0 - abs(np.vdot(a, b)) ** 2 / (na * nb)
    return float(min(max(d, 0.0), 1.0))


def distances_triple(state: CompositeState, pair: PhasePair) -> FSDistances:
    """Distances among ``Psi``, ``A1 Psi`` and ``A2 Psi`` evaluated on the vectors."""
    i, j = state.index(pair.i), state.index(pair.j)
    vec = state.vector(check=False)
    v2 = apply_a1(state.grid, vec, state.shifts, i, j)
    v3 = apply_a2(state.grid, vec, state.shifts, i, j)
    return FSDistances(fubini_study_D(vec, v2), fubini_study_D(v2, v3), fubini_study_D(vec, v3))


def closed_form_distances(ci2, cj2, z: OverlapZ, phi, total_norm: float = 1.0) -> FSDistances:
    """Closed forms of :func:`distances_triple` (``total_norm`` = ``|Psi|^2``)."""
    S, P, z2 = ci2 + cj2, ci2 * cj2, z.magnitude ** 2
    d12 = 1 - 4 * P * z2 * np.cos(phi) ** 2 / (S * total_norm)
    d23 = 1 - (ci2 - cj2) ** 2 / S ** 2
    d13 = 1 - 4 * P * z2 * np.sin(phi) ** 2 / (S * total_norm)
    return FSDistances(float(d12), float(d23), float(d13))


def uncertainty_terms(state: CompositeState, pair: PhasePair) -> tuple:
    """(var1, var2, comm) by applying A1, A2 to the full state vector.

    Moments are Rayleigh quotients ``<v|X|v>/<v|v>``, so the uncertainty relation
    is a theorem for unnormalized states too. ``<[A1, A2]> = i comm``.
    """
    g = state.grid
    i, j = state.index(pair.i), state.index(pair.j)
    v = state.vector(check=False)
    n = vector_inner(g, v, v).real
    a1v = apply_a1(g, v, state.shifts, i, j)
    a2v = apply_a2(g, v, state.shifts, i, j)
    m1 = vector_inner(g, v, a1v).real / n
    m2 = vector_inner(g, v, a2v).real / n
    s1 = vector_inner(g, a1v, a1v).real / n
    s2 = vector_inner(g, a2v, a2v).real / n
    comm = 2 * vector_inner(g, a1v, a2v).imag / n
    return s1 - m1 * m1, s2 - m2 * m2, comm
