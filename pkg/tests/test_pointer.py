import numpy as np
import pytest
from hypothesis import given, strategies as st

from macrophase.errors import ConfigurationError, GeometryError
from macrophase.pointer import (Grid, PointerWave, edge_mass, from_momentum, gaussian_packet, inner,
                                make_grid, shift_amplitudes, to_momentum, translate, wrapped_mass)


@pytest.fixture
def grid():
    return make_grid(512, -32, 32)


@pytest.mark.parametrize("n", [0, 4, 7, 100, 6.0])
def test_grid_rejects_bad_sizes(n):
    with pytest.raises(ConfigurationError):
        Grid(n, -1.0, 1.0)


def test_grid_rejects_empty_interval():
    with pytest.raises(ConfigurationError):
        make_grid(64, 1.0, 1.0)


def test_grid_spacing(grid):
    assert grid.dq == pytest.approx(0.125)
    assert grid.q[0] == -32 and grid.q[-1] == pytest.approx(32 - 0.125)
    assert grid.p_max == pytest.approx(np.pi / 0.125)
    assert np.sort(grid.p)[1] - np.sort(grid.p)[0] == pytest.approx(grid.dp)


def test_gaussian_moments(grid):
    w = gaussian_packet(grid, 1.5, 0.8, momentum=2.0)
    assert w.norm2 == pytest.approx(1, abs=1e-12)
    assert w.expect_q() == pytest.approx(1.5, abs=1e-10)
    assert w.variance_q() == pytest.approx(0.64, abs=1e-10)
    assert w.expect_p() == pytest.approx(2.0, abs=1e-10)


def test_packet_clipped_by_boundary():
    with pytest.raises(GeometryError):
        gaussian_packet(make_grid(64, -4, 4), 3.9, 1.0)


def test_packet_beyond_momentum_cutoff():
    with pytest.raises(GeometryError, match="cutoff"):
        gaussian_packet(make_grid(64, -32, 32), 0.0, 1.0, momentum=5.0)


def test_packet_width_must_be_positive(grid):
    with pytest.raises(ConfigurationError):
        gaussian_packet(grid, 0.0, 0.0)


def test_momentum_transform_preserves_norm(grid):
    w = gaussian_packet(grid, -3.0, 1.2, momentum=-1.0)
    phi = to_momentum(grid, w.amplitudes)
    assert np.sum(np.abs(phi) ** 2) * grid.dp == pytest.approx(1, abs=1e-12)
    np.testing.assert_allclose(from_momentum(grid, phi), w.amplitudes, atol=1e-13)


def test_momentum_amplitudes_of_gaussian_match_analytic(grid):
    # phi(p) = (2 w^2/pi)^(1/4) exp(-w^2 (p-k)^2 - i (p-k) c) for a packet centred at c
    c, width, k = 2.0, 1.0, 0.5
    w = gaussian_packet(grid, c, width, k)
    p = grid.p
    exact = (2 * width ** 2 / np.pi) ** 0.25 * np.exp(-width ** 2 * (p - k) ** 2 - 1j * p * c + 1j * k * c)
    np.testing.assert_allclose(w.momentum_amplitudes(), exact, atol=1e-10)


@given(st.floats(-10, 10), st.floats(-5, 5))
def test_translate_moves_centre(distance, centre):
    g = make_grid(512, -32, 32)
    w = gaussian_packet(g, centre, 1.0)
    moved = translate(w, distance)
    assert moved.expect_q() == pytest.approx(centre + distance, abs=1e-9)
    assert moved.norm2 == pytest.approx(1, abs=1e-12)


@given(st.floats(-8, 8), st.floats(-8, 8))
def test_translations_compose(a, b):
    g = make_grid(256, -32, 32)
    w = gaussian_packet(g, 0.0, 1.0)
    np.testing.assert_allclose(translate(translate(w, a), b).amplitudes,
                               translate(w, a + b).amplitudes, atol=1e-12)


def test_translate_by_grid_multiple_matches_roll(grid):
    w = gaussian_packet(grid, 0.0, 1.0)
    np.testing.assert_allclose(translate(w, 5 * grid.dq).amplitudes, np.roll(w.amplitudes, 5),
                               atol=1e-13)


def test_translate_refuses_wraparound(grid):
    w = gaussian_packet(grid, 20.0, 1.0)
    assert wrapped_mass(w, 10.0) > 1e-8
    with pytest.raises(GeometryError):
        translate(w, 10.0)
    with pytest.raises(GeometryError):
        translate(w, 100.0)
    translate(w, 10.0, check=False)


def test_shift_amplitudes_is_unitary(grid):
    rng = np.random.default_rng(0)
    v = rng.normal(size=grid.n_points) + 1j * rng.normal(size=grid.n_points)
    u = shift_amplitudes(grid, v, 3.7)
    assert np.vdot(u, u).real == pytest.approx(np.vdot(v, v).real, rel=1e-13)


def test_inner_product(grid):
    a = gaussian_packet(grid, 0.0, 1.0)
    b = gaussian_packet(grid, 2.0, 1.0)
    # overlap of equal-width Gaussians: exp(-d^2 / (8 w^2))
    assert inner(a, b) == pytest.approx(np.exp(-4 / 8), abs=1e-12)
    with pytest.raises(ConfigurationError):
        inner(a, gaussian_packet(make_grid(256, -32, 32), 0.0, 1.0))


def test_wave_is_read_only(grid):
    w = gaussian_packet(grid, 0.0, 1.0)
    with pytest.raises(ValueError):
        w.amplitudes[0] = 1
    with pytest.raises(ConfigurationError):
        PointerWave(grid, np.zeros(3))


def test_edge_mass_small_for_centred_packet(grid):
    assert edge_mass(gaussian_packet(grid, 0.0, 1.0)) < 1e-30
