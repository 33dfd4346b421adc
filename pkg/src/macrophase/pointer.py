"""
Discretized one-dimensional pointer space.

The pointer coordinate lives on a uniform periodic grid. Position and
momentum representations are linked by the FFT, so translations are exact
phase multiplications in momentum space and therefore exactly unitary.
Natural units (hbar = 1) throughout.

Translation convention: ``translate(w, L)`` applies ``exp(-i L p)`` and moves
the packet centre from ``q0`` to ``q0 + L``.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, GeometryError

#: Probability mass allowed to leak across the periodic seam.
LEAK_TOLERANCE = 1e-8
#: Gaussian packets must fit within this many widths of the grid edges.
PACKET_SIGMAS = 6.0
#: Fraction of the grid (each side) treated as the boundary band.
EDGE_FRACTION = 1.0 / 32.0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid ``q_m = q_min + m*dq`` with ``m = 0..n_points-1``."""

    n_points: int
    q_min: float
    q_max: float

    def __post_init__(self):
        n = self.n_points
        if not isinstance(n, (int, np.integer)) or n < 8 or n & (n - 1):
            raise ConfigurationError(
                f"n_points must be a power of two >= 8, got {n!r}")
        if not self.q_max > self.q_min:
            raise ConfigurationError(
                f"q_max ({self.q_max}) must exceed q_min ({self.q_min})")

    @property
    def extent(self) -> float:
        return self.q_max - self.q_min

    @property
    def dq(self) -> float:
        return self.extent / self.n_points

    @property
    def dp(self) -> float:
        return 2 * np.pi / (self.n_points * self.dq)

    @property
    def p_max(self) -> float:
        return np.pi / self.dq

    @cached_property
    def q(self) -> np.ndarray:
        q = self.q_min + self.dq * np.arange(self.n_points)
        q.setflags(write=False)
        return q

    @cached_property
    def p(self) -> np.ndarray:
        """Momentum lattice in FFT order."""
        p = 2 * np.pi * np.fft.fftfreq(self.n_points, d=self.dq)
        p.setflags(write=False)
        return p

    @cached_property
    def _seam_phase(self) -> np.ndarray:
        # offsets the FFT origin from index 0 to q = 0
        ph = np.exp(-1j * self.p * self.q_min)
        ph.setflags(write=False)
        return ph


def make_grid(n_points: int, q_min: float, q_max: float) -> Grid:
    return Grid(int(n_points), float(q_min), float(q_max))


def to_momentum(grid: Grid, amplitudes: np.ndarray) -> np.ndarray:
    """Momentum-space amplitudes phi(p_k), normalized so sum |phi|^2 dp = sum |psi|^2 dq.

    Works along the last axis, so stacked waves can be transformed at once.
    """
    return np.fft.fft(amplitudes, axis=-1) * grid._seam_phase * (grid.dq / np.sqrt(2 * np.pi))


def from_momentum(grid: Grid, phi: np.ndarray) -> np.ndarray:
    return np.fft.ifft(phi / grid._seam_phase, axis=-1) * (np.sqrt(2 * np.pi) / grid.dq)


@dataclass(frozen=True, eq=False)
class PointerWave:
    """Pointer wavefunction sampled on ``grid`` (position representation)."""

    grid: Grid
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex)
        if a.shape != (self.grid.n_points,):
            raise ConfigurationError(
                f"amplitudes have shape {a.shape}, expected ({self.grid.n_points},)")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @property
    def norm2(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.grid.dq)

    def momentum_amplitudes(self) -> np.ndarray:
        return to_momentum(self.grid, self.amplitudes)

    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def expect_q(self) -> float:
        return float(np.sum(self.grid.q * self.density()) * self.grid.dq / self.norm2)

    def expect_q2(self) -> float:
        return float(np.sum(self.grid.q ** 2 * self.density()) * self.grid.dq / self.norm2)

    def variance_q(self) -> float:
        return self.expect_q2() - self.expect_q() ** 2

    def expect_p(self) -> float:
        phi2 = np.abs(self.momentum_amplitudes()) ** 2
        return float(np.sum(self.grid.p * phi2) * self.grid.dp / self.norm2)

    def normalized(self) -> "PointerWave":
        return PointerWave(self.grid, self.amplitudes / np.sqrt(self.norm2))


def _check_same_grid(a: PointerWave, b: PointerWave):
    if a.grid != b.grid:
        raise ConfigurationError(f"grid mismatch: {a.grid} vs {b.grid}")


def inner(a: PointerWave, b: PointerWave) -> complex:
    """<a|b> = sum conj(a_m) b_m dq."""
    _check_same_grid(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes) * a.grid.dq)


def gaussian_packet(grid: Grid, center: float, width: float, momentum: float = 0.0) -> PointerWave:
    """Normalized Gaussian ``exp(-(q-center)^2/(4 width^2) + i momentum q)``.

    ``width`` is the position standard deviation of the density. Raises
    GeometryError when the packet (6 widths in q, 6 momentum widths in p)
    does not fit on the grid.
    """
    if not width > 0:
        raise ConfigurationError(f"width must be positive, got {width}")
    lo, hi = center - PACKET_SIGMAS * width, center + PACKET_SIGMAS * width
    if lo < grid.q_min or hi > grid.q_max:
        raise GeometryError(
            f"packet [{lo:g}, {hi:g}] clipped by grid [{grid.q_min:g}, {grid.q_max:g}]")
    sigma_p = 1.0 / (2.0 * width)
    if abs(momentum) + PACKET_SIGMAS * sigma_p > grid.p_max:
        raise GeometryError(
            f"momentum support {abs(momentum) + PACKET_SIGMAS * sigma_p:g} exceeds "
            f"grid cutoff {grid.p_max:g}; refine the grid")
    q = grid.q
    amp = np.exp(-((q - center) ** 2) / (4.0 * width ** 2) + 1j * momentum * q)
    wave = PointerWave(grid, amp).normalized()
    if edge_mass(wave) > LEAK_TOLERANCE:
        raise GeometryError("packet tail reaches the boundary band")
    return wave


def shift_amplitudes(grid: Grid, amplitudes: np.ndarray, distance: float) -> np.ndarray:
    """Periodic translation ``exp(-i distance p)`` along the last axis, no checks."""
    if distance == 0:
        return np.array(amplitudes, dtype=complex, copy=True)
    return np.fft.ifft(np.fft.fft(amplitudes, axis=-1) * np.exp(-1j * grid.p * distance), axis=-1)


def wrapped_mass(wave: PointerWave, distance: float) -> float:
    """Probability that a shift by ``distance`` carries across the periodic seam."""
    g = wave.grid
    if distance > 0:
        mask = g.q >= g.q_max - distance
    elif distance < 0:
        mask = g.q < g.q_min - distance
    else:
        return 0.0
    return float(np.sum(wave.density()[mask]) * g.dq)


def edge_mass(wave: PointerWave, fraction: float = EDGE_FRACTION) -> float:
    """Probability inside the boundary band on either side of the grid."""
    g = wave.grid
    band = max(fraction * g.extent, g.dq)
    mask = (g.q < g.q_min + band) | (g.q >= g.q_max - band)
    return float(np.sum(wave.density()[mask]) * g.dq)


def momentum_edge_mass(wave: PointerWave, fraction: float = EDGE_FRACTION) -> float:
    """Probability near the momentum cutoff, a sign of aliasing."""
    g = wave.grid
    phi2 = np.abs(wave.momentum_amplitudes()) ** 2
    mask = np.abs(g.p) > g.p_max * (1 - 2 * fraction)
    return float(np.sum(phi2[mask]) * g.dp)


def translate(wave: PointerWave, distance: float, check: bool = True) -> PointerWave:
    """Apply ``exp(-i distance p)``: the packet centre moves by ``+distance``.

    With ``check`` (default) a GeometryError is raised when more than
    LEAK_TOLERANCE of probability would wrap around the periodic grid.
    """
    if check:
        if abs(distance) >= wave.grid.extent:
            raise GeometryError(f"shift {distance:g} exceeds grid extent {wave.grid.extent:g}")
        leak = wrapped_mass(wave, distance)
        if leak > LEAK_TOLERANCE:
            raise GeometryError(
                f"shift by {distance:g} wraps {leak:.3g} of probability around the grid")
    if distance == 0:
        return wave
    return PointerWave(wave.grid, shift_amplitudes(wave.grid, wave.amplitudes, distance))
