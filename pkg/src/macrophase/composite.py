"""
System (x) apparatus states in branch form.

A state ``sum_n c_n |n> (x) |chi_n>`` is stored as coefficients plus one
pointer wave per branch. The waves are kept in the co-moving frame
``psi_n = exp(+i L_n p) chi_n``, i.e. with the coupling displacement
``L_n = L * O_n`` removed. Right after coupling every ``psi_n`` equals the
initial packet, and the overlap factor between branches is simply
``Z_ij = <psi_i|psi_j>``. Lab-frame waves ``chi_n`` are rebuilt on demand.

The phase operators of a branch pair are written through the transfer
operator ``X = T_i |i><j| T_j^dagger`` (``T_n = exp(-i L_n p)``)::

    A1 = (X + X^dagger) / 2
    A2 = i (X^dagger - X) / 2
    A  = A1 + i A2 = X
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .pointer import Grid, PointerWave, shift_amplitudes, translate

NORM_TOLERANCE = 1e-8
WAVE_NORM_TOLERANCE = 1e-10


@dataclass(frozen=True)
class BranchSpec:
    label: int
    coefficient: complex
    eigenvalue: float


@dataclass(frozen=True)
class PhasePair:
    """Two branches ``i != j`` and their pointer displacements."""

    i: int
    j: int
    L_i: float
    L_j: float

    def __post_init__(self):
        if self.i == self.j:
            raise ConfigurationError(f"phase pair needs two distinct labels, got ({self.i}, {self.j})")


def _unit_overlap(a: np.ndarray, b: np.ndarray) -> complex:
    """<a|b>/(|a||b|) with |.| <= 1 enforced against rounding."""
    if np.array_equal(a, b):
        return 1.0 + 0j
    na = np.vdot(a, a).real
    nb = np.vdot(b, b).real
    z = complex(np.vdot(a, b) / np.sqrt(na * nb))
    mag = abs(z)
    if mag > 1.0:
        # Cauchy-Schwarz; only rounding can get here
        z /= mag
    return z


@dataclass(frozen=True, eq=False)
class CompositeState:
    """Branch-form state. Use :func:`couple` rather than building one by hand.

    ``frame`` holds one co-moving pointer wave per branch (rows). ``normalized``
    is False only for the deliberately unnormalized states of the falsifier.
    """

    grid: Grid
    labels: tuple
    coefficients: np.ndarray
    eigenvalues: np.ndarray
    coupling_length: float
    frame: np.ndarray
    elapsed: float = 0.0
    normalized: bool = True
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        labels = tuple(int(x) for x in self.labels)
        if len(set(labels)) != len(labels):
            raise ConfigurationError(f"branch labels must be unique, got {labels}")
        c = np.array(self.coefficients, dtype=complex).reshape(-1)
        o = np.array(self.eigenvalues, dtype=float).reshape(-1)
        fr = np.array(self.frame, dtype=complex)
        if not (len(c) == len(o) == len(labels) == fr.shape[0]) or fr.shape[1:] != (self.grid.n_points,):
            raise ConfigurationError("inconsistent branch data shapes")
        if self.normalized and abs(np.sum(np.abs(c) ** 2) - 1) > NORM_TOLERANCE:
            raise ConfigurationError(
                f"sum |c_n|^2 = {np.sum(np.abs(c) ** 2):.12g}; pass normalized=False "
                "only for falsifier studies")
        wave_norms = np.sum(np.abs(fr) ** 2, axis=1) * self.grid.dq
        if np.any(np.abs(wave_norms - 1) > WAVE_NORM_TOLERANCE):
            raise ConfigurationError(f"pointer waves not normalized: {wave_norms}")
        for a in (c, o, fr):
            a.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "eigenvalues", o)
        object.__setattr__(self, "frame", fr)
        object.__setattr__(self, "_index", {lab: k for k, lab in enumerate(labels)})

    @property
    def n_branches(self) -> int:
        return len(self.labels)

    @property
    def shifts(self) -> np.ndarray:
        """Pointer displacements ``L_n = L * O_n``."""
        return self.coupling_length * self.eigenvalues

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.coefficients) ** 2

    @property
    def total_norm(self) -> float:
        return float(np.sum(self.probabilities))

    def index(self, label: int) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise ConfigurationError(f"unknown branch label {label}; have {self.labels}") from None

    def pair(self, i: int, j: int) -> PhasePair:
        s = self.shifts
        return PhasePair(i, j, float(s[self.index(i)]), float(s[self.index(j)]))

    def lab_waves(self, check: bool = True) -> np.ndarray:
        """Rows ``chi_n = exp(-i L_n p) psi_n``; ``check`` guards against wraparound."""
        out = np.empty_like(self.frame)
        for k, (row, shift) in enumerate(zip(self.frame, self.shifts)):
            out[k] = translate(PointerWave(self.grid, row), shift, check=check).amplitudes
        return out

    def pointer(self, label: int) -> PointerWave:
        """Lab-frame pointer wave of one branch."""
        k = self.index(label)
        return translate(PointerWave(self.grid, self.frame[k]), float(self.shifts[k]))

    def vector(self, check: bool = True) -> np.ndarray:
        """Full state as rows ``c_n chi_n`` of shape (n_branches, n_points)."""
        return self.coefficients[:, None] * self.lab_waves(check=check)

    def with_frame(self, frame: np.ndarray, elapsed: float) -> "CompositeState":
        return CompositeState(self.grid, self.labels, self.coefficients, self.eigenvalues,
                              self.coupling_length, frame, elapsed, self.normalized)


def couple(branches, L: float, initial: PointerWave, normalized: bool = True) -> CompositeState:
    """Premeasurement: ``sum_n c_n |n> (x) exp(-i L O_n p)|psi>``.

    Raises GeometryError if any displaced packet would wrap around the grid.
    """
    branches = list(branches)
    if not branches:
        raise ConfigurationError("at least one branch is required")
    if abs(initial.norm2 - 1) > WAVE_NORM_TOLERANCE:
        raise ConfigurationError(f"initial pointer state has norm^2 {initial.norm2}")
    for b in branches:
        translate(initial, L * b.eigenvalue)
    frame = np.tile(initial.amplitudes, (len(branches), 1))
    return CompositeState(
        grid=initial.grid,
        labels=tuple(b.label for b in branches),
        coefficients=[b.coefficient for b in branches],
        eigenvalues=[b.eigenvalue for b in branches],
        coupling_length=float(L),
        frame=frame,
        normalized=normalized,
    )


def gram_matrix(state: CompositeState) -> np.ndarray:
    """Pointer Gram matrix ``G_mn = <chi_m|chi_n>``."""
    chi = state.lab_waves(check=False)
    return chi.conj() @ chi.T * state.grid.dq


def expect_system_operator(state: CompositeState, matrix) -> complex:
    """<Psi| S (x) 1 |Psi> for a system operator given in the branch-label basis."""
    m = np.asarray(matrix, dtype=complex)
    c = state.coefficients
    return complex(np.sum(np.outer(c.conj(), c) * m * gram_matrix(state)))


def expect_observable(state: CompositeState) -> float:
    """<Psi|O|Psi> evaluated on the full state, cross terms included."""
    return expect_system_operator(state, np.diag(state.eigenvalues)).real


def overlap_factor(state: CompositeState, pair: PhasePair) -> complex:
    """``Z_ij = <chi_i| T_i T_j^dagger |chi_j>``, read off the co-moving waves."""
    a = state.frame[state.index(pair.i)]
    b = state.frame[state.index(pair.j)]
    return _unit_overlap(a, b)


def _pair_coefficients(state, pair):
    return state.coefficients[state.index(pair.i)], state.coefficients[state.index(pair.j)]


def expect_transfer(state: CompositeState, pair: PhasePair) -> complex:
    """<A> = <A1> + i<A2> = c_i* c_j Z_ij."""
    ci, cj = _pair_coefficients(state, pair)
    return complex(np.conj(ci) * cj * overlap_factor(state, pair))


def expect_phase_ops(state: CompositeState, pair: PhasePair) -> tuple:
    """(<A1>, <A2>); equal to |c_i||c_j| |Z| (cos, sin) of the relative phase."""
    w = expect_transfer(state, pair)
    return w.real, w.imag


def variance_phase_ops(state: CompositeState, pair: PhasePair) -> tuple:
    """Definitional variances ``<A^2> - <A>^2`` using ``A1^2 = A2^2 = (P_i + P_j)/4``."""
    ci, cj = _pair_coefficients(state, pair)
    second = 0.25 * (abs(ci) ** 2 + abs(cj) ** 2)
    a1, a2 = expect_phase_ops(state, pair)
    return second - a1 ** 2, second - a2 ** 2


def commutator_expect(state: CompositeState, pair: PhasePair) -> float:
    """Real number ``k`` with ``<[A1, A2]> = i k``.

    Operator algebra gives ``[A1, A2] = (i/2)(P_i - P_j)``, hence
    ``k = (|c_i|^2 - |c_j|^2)/2``.
    """
    ci, cj = _pair_coefficients(state, pair)
    return 0.5 * (abs(ci) ** 2 - abs(cj) ** 2)


# -- operator action on explicit branch vectors ---------------------------------
# ``vec`` has shape (n_branches, n_points) in the lab frame; ``i`` and ``j`` are
# row indices, ``shifts`` the per-row displacements L_n.

def apply_transfer(grid: Grid, vec, shifts, i: int, j: int, adjoint: bool = False) -> np.ndarray:
    """X v (or X^dagger v) with ``X = T_i |i><j| T_j^dagger``."""
    vec = np.asarray(vec, dtype=complex)
    out = np.zeros_like(vec)
    if adjoint:
        i, j = j, i
    out[i] = shift_amplitudes(grid, vec[j], shifts[i] - shifts[j])
    return out


def apply_a1(grid, vec, shifts, i, j) -> np.ndarray:
    return 0.5 * (apply_transfer(grid, vec, shifts, i, j)
                  + apply_transfer(grid, vec, shifts, i, j, adjoint=True))


def apply_a2(grid, vec, shifts, i, j) -> np.ndarray:
    return 0.5j * (apply_transfer(grid, vec, shifts, i, j, adjoint=True)
                   - apply_transfer(grid, vec, shifts, i, j))


def apply_projector(vec, rows) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    out = np.zeros_like(vec)
    out[list(rows)] = vec[list(rows)]
    return out


def vector_inner(grid: Grid, u, v) -> complex:
    return complex(np.vdot(u, v) * grid.dq)


def dense_translation(grid: Grid, distance: float) -> np.ndarray:
    """Matrix of ``exp(-i distance p)`` acting on position amplitudes."""
    return shift_amplitudes(grid, np.eye(grid.n_points), distance).T


def dense_phase_operators(grid: Grid, shifts, i: int, j: int) -> tuple:
    """A1 and A2 as explicit (n_b*n, n_b*n) matrices, flattening row-major."""
    n = grid.n_points
    nb = len(shifts)
    x = np.zeros((nb * n, nb * n), dtype=complex)
    x[i * n:(i + 1) * n, j * n:(j + 1) * n] = dense_translation(grid, shifts[i] - shifts[j])
    xd = x.conj().T
    return 0.5 * (x + xd), 0.5j * (xd - x)
