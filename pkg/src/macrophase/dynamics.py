"""
Apparatus Hamiltonians and time evolution of the pointer.

``H = p^2/(2M) + V(q + shift)``. The production propagator is the symmetric
(Strang) split-step Fourier method; ``propagate_dense`` exponentiates the same
discretized Hamiltonian exactly and serves as an oracle on small grids.
"""
import math
from dataclasses import dataclass, replace

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.linalg import expm

from .composite import CompositeState
from .errors import ConfigurationError, GeometryError, NumericalInstabilityError
from .pointer import (LEAK_TOLERANCE, Grid, PointerWave, edge_mass, momentum_edge_mass,
                      translate)

NORM_DRIFT_LIMIT = 1e-8
#: Relative change of <H> a gated step size must keep below.
ENERGY_DRIFT_LIMIT = 1e-6
DENSE_MAX_POINTS = 256

_KINDS = {"none": 0, "linear": 1, "harmonic": 1, "quartic": 1, "polynomial": None}


@dataclass(frozen=True)
class ApparatusHamiltonian:
    """Pointer Hamiltonian; the potential is evaluated at ``q + shift``.

    ``params`` by kind: none ``()``; linear ``(k,)`` for ``k q``; harmonic
    ``(omega,)`` for ``M omega^2 q^2 / 2``; quartic ``(lam,)`` for ``lam q^4``;
    polynomial ``(a0, a1, ...)`` for ``sum a_n q^n``.
    """

    mass: float = 1.0
    kind: str = "none"
    params: tuple = ()
    shift: float = 0.0

    def __post_init__(self):
        if not self.mass > 0:
            raise ConfigurationError(f"mass must be positive, got {self.mass}")
        if self.kind not in _KINDS:
            raise ConfigurationError(f"unknown potential kind {self.kind!r}; choose from {sorted(_KINDS)}")
        params = tuple(float(x) for x in self.params)
        need = _KINDS[self.kind]
        if need is not None and len(params) != need:
            raise ConfigurationError(f"potential {self.kind!r} takes {need} parameter(s), got {len(params)}")
        if self.kind == "polynomial" and not params:
            raise ConfigurationError("polynomial potential needs at least one coefficient")
        object.__setattr__(self, "params", params)

    @classmethod
    def free(cls, mass=1.0):
        return cls(mass, "none")

    @classmethod
    def linear(cls, k, mass=1.0):
        return cls(mass, "linear", (k,))

    @classmethod
    def harmonic(cls, omega, mass=1.0):
        return cls(mass, "harmonic", (omega,))

    @classmethod
    def quartic(cls, lam, mass=1.0):
        return cls(mass, "quartic", (lam,))

    @classmethod
    def polynomial(cls, coeffs, mass=1.0):
        return cls(mass, "polynomial", tuple(coeffs))

    @property
    def depends_on_q(self) -> bool:
        return self.kind != "none" and not (self.kind == "polynomial" and not any(self.params[1:]))

    def _coefficients(self) -> np.ndarray:
        if self.kind == "none":
            return np.zeros(1)
        if self.kind == "linear":
            return np.array([0.0, self.params[0]])
        if self.kind == "harmonic":
            return np.array([0.0, 0.0, 0.5 * self.mass * self.params[0] ** 2])
        if self.kind == "quartic":
            return np.array([0.0, 0.0, 0.0, 0.0, self.params[0]])
        return np.array(self.params)

    def potential(self, q) -> np.ndarray:
        x = np.asarray(q, dtype=float) + self.shift
        if self.kind == "none":
            return np.zeros_like(x)
        v = P.polyval(x, self._coefficients())
        if not np.all(np.isfinite(v)):
            raise ConfigurationError("potential overflows on the grid")
        return v

    def curvature(self, q) -> np.ndarray:
        x = np.asarray(q, dtype=float) + self.shift
        c = self._coefficients()
        if len(c) < 3:
            return np.zeros_like(x)
        return P.polyval(x, P.polyder(c, 2))

    def kinetic(self, grid: Grid) -> np.ndarray:
        return grid.p ** 2 / (2.0 * self.mass)


def shifted(h: ApparatusHamiltonian, L: float) -> ApparatusHamiltonian:
    """``H(q + L)``: conjugation of ``H`` by the translation ``exp(-i L p)``."""
    return replace(h, shift=h.shift + L)


@dataclass(frozen=True)
class PropagatorConfig:
    """Split-step settings.

    ``dt=None`` selects the step automatically. ``gate`` is the convergence
    criterion: halving dt must change the final-state fidelity by less than
    this, and ``<H>`` must drift by less than ``ENERGY_DRIFT_LIMIT``. ``verify`` re-checks the gate for an explicitly given dt.
    """

    dt: float = None
    gate: float = 1e-8
    verify: bool = True
    max_halvings: int = 16

    def __post_init__(self):
        if self.dt is not None and not self.dt > 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")


def _split_step(grid: Grid, rows: np.ndarray, potentials: np.ndarray, kinetic: np.ndarray,
                t: float, dt: float) -> np.ndarray:
    """Strang splitting ``e^{-iV dt/2} e^{-iK dt} e^{-iV dt/2}`` on stacked rows.

    ``t`` may be negative; the step count depends only on ``|t|`` and ``dt`` so a
    backward call retraces a forward one exactly.
    """
    n = max(1, math.ceil(abs(t) / dt - 1e-9))
    h = t / n
    half_v = np.exp(-0.5j * h * potentials)
    full_v = half_v * half_v
    exp_k = np.exp(-1j * h * kinetic)
    psi = rows * half_v
    for k in range(n):
        psi = np.fft.ifft(np.fft.fft(psi, axis=-1) * exp_k, axis=-1)
        psi = psi * (full_v if k < n - 1 else half_v)
    return psi


def _infidelity(grid, a, b) -> float:
    ov = np.abs(np.sum(a.conj() * b, axis=-1) * grid.dq) ** 2
    na = np.sum(np.abs(a) ** 2, axis=-1) * grid.dq
    nb = np.sum(np.abs(b) ** 2, axis=-1) * grid.dq
    return float(np.max(1.0 - ov / (na * nb)))


def _row_energies(rows, potentials, kinetic) -> tuple:
    """(<H>, <K>) per row."""
    phi2 = np.abs(np.fft.fft(rows, axis=-1)) ** 2
    kin = np.sum(kinetic * phi2, axis=-1) / np.sum(phi2, axis=-1)
    dens = np.abs(rows) ** 2
    pot = np.sum(potentials * dens, axis=-1) / np.sum(dens, axis=-1)
    return kin + pot, kin


def _energy_drift(before, after, potentials, kinetic) -> float:
    """Largest change of <H> per row relative to max(|<H>|, <K>)."""
    e0, k0 = _row_energies(before, potentials, kinetic)
    e1, _ = _row_energies(after, potentials, kinetic)
    return float(np.max(np.abs(e1 - e0) / np.maximum(np.abs(e0), k0)))


def initial_dt(grid: Grid, rows: np.ndarray, hamiltonians) -> float:
    """``0.01 * min(1, 2 pi / omega)`` with omega from the potential curvature
    over the region the packets occupy."""
    dens = np.abs(np.atleast_2d(rows)) ** 2
    omega = 0.0
    for d, h in zip(dens, hamiltonians):
        occupied = d > 1e-12 * d.max()
        curv = np.abs(h.curvature(grid.q[occupied]))
        if curv.size:
            omega = max(omega, math.sqrt(curv.max() / h.mass))
    return 0.01 * min(1.0, 2 * math.pi / omega) if omega > 0 else 0.01


def _gated(grid: Grid, rows, hamiltonians, t: float, cfg: PropagatorConfig):
    rows = np.atleast_2d(np.asarray(rows, dtype=complex))
    pots = np.array([h.potential(grid.q) for h in hamiltonians])
    kin = hamiltonians[0].kinetic(grid)
    dt = cfg.dt if cfg.dt is not None else initial_dt(grid, rows, hamiltonians)
    if t == 0:
        return dt, rows.copy()
    dt = 2 * dt if cfg.dt is not None else min(dt, abs(t))
    coarse = _split_step(grid, rows, pots, kin, t, dt)
    for _ in range(cfg.max_halvings + 1):
        fine = _split_step(grid, rows, pots, kin, t, dt / 2)
        miss = _infidelity(grid, coarse, fine)
        drift = _energy_drift(rows, fine, pots, kin)
        if miss < cfg.gate and drift < ENERGY_DRIFT_LIMIT:
            return dt / 2, fine
        if cfg.dt is not None:
            raise NumericalInstabilityError(
                f"dt={dt / 2:g} fails the convergence gate (infidelity {miss:.3g}, "
                f"energy drift {drift:.3g})")
        dt, coarse = dt / 2, fine
    raise NumericalInstabilityError(f"no convergence after {cfg.max_halvings} halvings of dt")


def choose_dt(grid: Grid, rows, hamiltonians, t: float, cfg: PropagatorConfig = None) -> float:
    """Step size whose result changes by less than ``cfg.gate`` in fidelity when
    the step is doubled, halving from the initial guess as needed.

    With an explicit ``cfg.dt`` the gate is checked for that step only.
    """
    return _gated(grid, rows, hamiltonians, abs(t), cfg or PropagatorConfig())[0]


def check_rows(grid: Grid, rows: np.ndarray, norms_before: np.ndarray):
    norms = np.sum(np.abs(rows) ** 2, axis=-1) * grid.dq
    drift = np.max(np.abs(norms - norms_before))
    if drift > NORM_DRIFT_LIMIT:
        raise NumericalInstabilityError(f"norm drift {drift:.3g} during propagation")
    for row in rows:
        w = PointerWave(grid, row)
        if edge_mass(w) > LEAK_TOLERANCE:
            raise GeometryError("packet reached the grid boundary during propagation")
        if momentum_edge_mass(w) > LEAK_TOLERANCE:
            raise GeometryError("packet reached the momentum cutoff; refine the grid")


def evolve_rows(grid: Grid, rows, hamiltonians, t: float, cfg: PropagatorConfig = None) -> np.ndarray:
    """Evolve each row under its own Hamiltonian for signed time ``t`` (no geometry checks)."""
    rows = np.atleast_2d(np.asarray(rows, dtype=complex))
    cfg = cfg or PropagatorConfig()
    if t == 0:
        return rows.copy()
    if cfg.dt is None or cfg.verify:
        return _gated(grid, rows, hamiltonians, t, cfg)[1]
    pots = np.array([h.potential(grid.q) for h in hamiltonians])
    return _split_step(grid, rows, pots, hamiltonians[0].kinetic(grid), t, cfg.dt)


def propagate_wave(wave: PointerWave, h: ApparatusHamiltonian, t: float,
                   cfg: PropagatorConfig = None) -> PointerWave:
    """``exp(-i t H) |wave>`` by split-step."""
    if t < 0:
        raise ConfigurationError(f"t must be >= 0, got {t}")
    if t == 0:
        return wave
    rows = evolve_rows(wave.grid, wave.amplitudes, [h], t, cfg)
    check_rows(wave.grid, rows, np.array([wave.norm2]))
    return PointerWave(wave.grid, rows[0])


def _branch_hamiltonians(state: CompositeState, h: ApparatusHamiltonian):
    # co-moving wave of branch n feels H(q + L_n)
    return [shifted(h, float(L)) for L in state.shifts]


def _evolve_state(state, h, t, cfg):
    hams = _branch_hamiltonians(state, h)
    rows = evolve_rows(state.grid, state.frame, hams, t, cfg)
    check_rows(state.grid, rows, np.sum(np.abs(state.frame) ** 2, axis=-1) * state.grid.dq)
    new = state.with_frame(rows, state.elapsed + t)
    new.lab_waves(check=True)
    return new


def propagate(state: CompositeState, h: ApparatusHamiltonian, t: float,
              cfg: PropagatorConfig = None) -> CompositeState:
    """``exp(-i t H)`` applied to every branch; coefficients untouched.

    Each lab-frame branch evolves under ``H``. Internally the co-moving wave of
    branch ``n`` evolves under ``H(q + L_n)``, which is the same unitary
    conjugated by the coupling translation.
    """
    if t < 0:
        raise ConfigurationError(f"t must be >= 0, got {t}")
    if t == 0:
        return state
    return _evolve_state(state, h, t, cfg)


def propagate_back(state: CompositeState, h: ApparatusHamiltonian, t: float,
                   cfg: PropagatorConfig = None) -> CompositeState:
    """``exp(+i t H)``; with the same ``cfg`` it exactly retraces :func:`propagate`."""
    if t < 0:
        raise ConfigurationError(f"t must be >= 0, got {t}")
    if t == 0:
        return state
    return _evolve_state(state, h, -t, cfg)


def dense_hamiltonian(grid: Grid, h: ApparatusHamiltonian) -> np.ndarray:
    """Discretized ``H`` as an explicit matrix, kinetic part built in momentum space."""
    n = grid.n_points
    if n > DENSE_MAX_POINTS:
        raise ConfigurationError(f"dense propagation limited to {DENSE_MAX_POINTS} points, grid has {n}")
    kin = np.fft.ifft(h.kinetic(grid)[:, None] * np.fft.fft(np.eye(n), axis=0), axis=0)
    kin = 0.5 * (kin + kin.conj().T)
    return kin + np.diag(h.potential(grid.q))


def propagate_dense(wave: PointerWave, h: ApparatusHamiltonian, t: float) -> PointerWave:
    """Oracle propagator: explicit matrix exponential of the discretized ``H``."""
    H = dense_hamiltonian(wave.grid, h)
    if t == 0:
        return wave
    return PointerWave(wave.grid, expm(-1j * t * H) @ wave.amplitudes)


def energy(wave: PointerWave, h: ApparatusHamiltonian) -> float:
    """<H> = <p^2/2M> + <V>."""
    g = wave.grid
    phi2 = np.abs(wave.momentum_amplitudes()) ** 2
    kin = np.sum(h.kinetic(g) * phi2) * g.dp
    pot = np.sum(h.potential(g.q) * wave.density()) * g.dq
    return float((kin + pot) / wave.norm2)


def translate_conjugated(wave: PointerWave, h: ApparatusHamiltonian, L: float, t: float,
                         cfg: PropagatorConfig = None) -> PointerWave:
    """``T(-L) exp(-i t H) T(L) |wave>``; equal to evolving under ``shifted(h, L)``."""
    moved = translate(wave, L)
    return translate(propagate_wave(moved, h, t, cfg), -L)
