import numpy as np
import pytest
from hypothesis import given, strategies as st

from macrophase.composite import (BranchSpec, CompositeState, PhasePair, apply_a1, apply_a2,
                                  apply_projector, apply_transfer, commutator_expect, couple,
                                  dense_phase_operators, dense_translation, expect_observable,
                                  expect_phase_ops, expect_system_operator, gram_matrix,
                                  overlap_factor, variance_phase_ops, vector_inner)
from macrophase.errors import ConfigurationError, GeometryError
from macrophase.pointer import gaussian_packet, make_grid

GRID = make_grid(256, -24, 24)
PACKET = gaussian_packet(GRID, 0.0, 1.0)


def _state(coeffs, eigs, L=4.0):
    return couple([BranchSpec(k, c, o) for k, (c, o) in enumerate(zip(coeffs, eigs))], L, PACKET)


def _random_vector(rng, nb, n):
    return rng.normal(size=(nb, n)) + 1j * rng.normal(size=(nb, n))


def test_couple_displaces_branches():
    s = _state([0.6, 0.8j], [1.0, -1.0], L=5.0)
    np.testing.assert_allclose(s.shifts, [5.0, -5.0])
    assert s.pointer(0).expect_q() == pytest.approx(5.0, abs=1e-10)
    assert s.pointer(1).expect_q() == pytest.approx(-5.0, abs=1e-10)
    # co-moving waves all equal the initial packet
    assert np.array_equal(s.frame[0], s.frame[1])


def test_couple_rejects_wraparound():
    with pytest.raises(GeometryError):
        _state([0.6, 0.8], [1.0, -1.0], L=30.0)


def test_normalization_enforced():
    with pytest.raises(ConfigurationError, match="normalized=False"):
        _state([0.6, 0.9], [1.0, -1.0])
    s = couple([BranchSpec(0, 0.6, 1.0), BranchSpec(1, 0.9, -1.0)], 4.0, PACKET, normalized=False)
    assert s.total_norm == pytest.approx(1.17)


def test_duplicate_labels_and_bad_pairs():
    with pytest.raises(ConfigurationError):
        couple([BranchSpec(0, 0.6, 1.0), BranchSpec(0, 0.8, -1.0)], 4.0, PACKET)
    with pytest.raises(ConfigurationError):
        PhasePair(1, 1, 0.0, 0.0)
    with pytest.raises(ConfigurationError):
        _state([0.6, 0.8], [1.0, -1.0]).pair(0, 7)


def test_state_arrays_are_read_only():
    s = _state([0.6, 0.8], [1.0, -1.0])
    with pytest.raises(ValueError):
        s.coefficients[0] = 1.0


def test_dense_translation_moves_packet():
    t = dense_translation(GRID, 3.0)
    moved = t @ PACKET.amplitudes
    assert np.sum(GRID.q * np.abs(moved) ** 2) * GRID.dq == pytest.approx(3.0, abs=1e-10)
    np.testing.assert_allclose(t.conj().T @ t, np.eye(GRID.n_points), atol=1e-12)


def test_operator_application_matches_dense_matrices():
    g = make_grid(32, -8, 8)
    rng = np.random.default_rng(5)
    shifts = np.array([1.3, -0.4, 2.2])
    v = _random_vector(rng, 3, 32)
    a1, a2 = dense_phase_operators(g, shifts, 2, 0)
    np.testing.assert_allclose(apply_a1(g, v, shifts, 2, 0).reshape(-1), a1 @ v.reshape(-1), atol=1e-12)
    np.testing.assert_allclose(apply_a2(g, v, shifts, 2, 0).reshape(-1), a2 @ v.reshape(-1), atol=1e-12)
    np.testing.assert_allclose(a1, a1.conj().T, atol=1e-14)
    np.testing.assert_allclose(a2, a2.conj().T, atol=1e-14)


def test_dense_algebra():
    g = make_grid(32, -8, 8)
    shifts = np.array([0.7, -1.9])
    a1, a2 = dense_phase_operators(g, shifts, 0, 1)
    n = g.n_points
    p_i = np.diag(np.r_[np.ones(n), np.zeros(n)])
    p_j = np.eye(2 * n) - p_i
    np.testing.assert_allclose(a1 @ a1, 0.25 * (p_i + p_j), atol=1e-12)
    np.testing.assert_allclose(a2 @ a2, 0.25 * (p_i + p_j), atol=1e-12)
    np.testing.assert_allclose(a1 @ a2 - a2 @ a1, 0.5j * (p_i - p_j), atol=1e-12)


@given(st.floats(0.01, 0.99), st.floats(-np.pi, np.pi), st.floats(-np.pi, np.pi))
def test_expectations_after_coupling(prob, ph_i, ph_j):
    ci, cj = np.sqrt(prob) * np.exp(1j * ph_i), np.sqrt(1 - prob) * np.exp(1j * ph_j)
    s = _state([ci, cj], [0.5, -0.5])
    pair = s.pair(0, 1)
    v = s.vector()
    a1 = vector_inner(GRID, v, apply_a1(GRID, v, s.shifts, 0, 1)).real
    a2 = vector_inner(GRID, v, apply_a2(GRID, v, s.shifts, 0, 1)).real
    phi = np.angle(np.conj(ci) * cj)
    mod = abs(ci) * abs(cj)
    assert overlap_factor(s, pair) == 1
    np.testing.assert_allclose(expect_phase_ops(s, pair), (mod * np.cos(phi), mod * np.sin(phi)), atol=1e-12)
    np.testing.assert_allclose((a1, a2), expect_phase_ops(s, pair), atol=1e-12)


def test_variances_and_commutator_match_vectors():
    rng = np.random.default_rng(9)
    c = rng.normal(size=3) + 1j * rng.normal(size=3)
    c /= np.linalg.norm(c)
    s = _state(c, [1.0, 0.0, -1.0])
    pair = s.pair(2, 0)
    v = s.vector()
    a1v = apply_a1(GRID, v, s.shifts, 2, 0)
    a2v = apply_a2(GRID, v, s.shifts, 2, 0)
    m1, m2 = vector_inner(GRID, v, a1v).real, vector_inner(GRID, v, a2v).real
    var1 = vector_inner(GRID, a1v, a1v).real - m1 ** 2
    var2 = vector_inner(GRID, a2v, a2v).real - m2 ** 2
    np.testing.assert_allclose(variance_phase_ops(s, pair), (var1, var2), atol=1e-12)
    comm = vector_inner(GRID, a1v, a2v) - vector_inner(GRID, a2v, a1v)
    assert comm.real == pytest.approx(0, abs=1e-12)
    assert comm.imag == pytest.approx(commutator_expect(s, pair), abs=1e-12)


def test_transfer_and_projector():
    rng = np.random.default_rng(1)
    v = _random_vector(rng, 3, GRID.n_points)
    shifts = np.array([2.0, 0.0, -2.0])
    x = apply_transfer(GRID, v, shifts, 0, 2)
    assert np.all(x[1:] == 0)
    back = apply_transfer(GRID, x, shifts, 0, 2, adjoint=True)
    np.testing.assert_allclose(back, apply_projector(v, [2]), atol=1e-12)


def test_observable_and_gram():
    s = _state([0.6, 0.8], [1.0, -1.0], L=8.0)
    gm = gram_matrix(s)
    np.testing.assert_allclose(np.diag(gm).real, 1, atol=1e-12)
    # displaced Gaussians overlap as exp(-d^2/8)
    assert abs(gm[0, 1]) == pytest.approx(np.exp(-16 ** 2 / 8), abs=1e-12)
    assert expect_observable(s) == pytest.approx(0.36 - 0.64, abs=1e-12)
    assert expect_system_operator(s, np.eye(2)).real == pytest.approx(1, abs=1e-12)


def test_frame_rows_must_be_normalized():
    s = _state([0.6, 0.8], [1.0, -1.0])
    with pytest.raises(ConfigurationError):
        CompositeState(GRID, (0, 1), s.coefficients, s.eigenvalues, 4.0, 2 * s.frame)
