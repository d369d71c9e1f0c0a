import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cavitychain import (BadKind, IndexOutOfRange, ModelParams, build_U_closed, build_U_exact,
                         build_Y, component_formula_e, component_formula_pair, propagate,
                         propagation_matrix, propagator_blocks)

from .strategies import labels, params as param_st


def test_hamiltonian_structure():
    p = ModelParams(1.5, 0.8, 0.6, 1.0, 0.2, 0.0)
    h = build_Y(2, 3, p)
    expected = np.diag([1.5, 0.8, 0.8, 0.8])
    expected[0, 2] = expected[2, 0] = 0.6
    assert np.allclose(h.Y, expected, atol=1e-15)
    assert np.array_equal(h.Y, h.Y.T)
    assert h.P0[0, 0] == 1 and h.P0.sum() == 1


@given(param_st(), st.integers(1, 5), st.data())
def test_hamiltonian_spectrum(p, N, data):
    n = data.draw(st.integers(1, N))
    ev = np.sort(np.linalg.eigvalsh(build_Y(n, N, p).Y))
    half = math.sqrt((p.E - p.epsilon) ** 2 / 4 + p.eta ** 2)
    ref = np.sort([p.epsilon] * (N - 1) + [(p.E + p.epsilon) / 2 + half, (p.E + p.epsilon) / 2 - half])
    assert np.allclose(ev, ref, atol=1e-12)
    assert ev[0] >= -1e-12  # admissible coupling keeps the energy nonnegative


@pytest.mark.parametrize("n,N", [(0, 3), (4, 3), (1, 0)])
def test_step_index_errors(golden_params, n, N):
    with pytest.raises(IndexOutOfRange):
        build_Y(n, N, golden_params)
    with pytest.raises(IndexOutOfRange):
        build_U_closed(n, N, golden_params)


@given(param_st(), st.integers(1, 5), st.floats(0.0, 3.0), st.data())
def test_exact_and_closed_step_agree(p, N, s, data):
    n = data.draw(st.integers(1, N))
    A = build_U_exact(n, N, p, s).matrix
    B = build_U_closed(n, N, p, s).matrix
    assert np.max(np.abs(A - B)) <= 1e-10


def test_step_at_zero_duration(golden_params):
    assert np.allclose(build_U_closed(2, 3, golden_params, 0.0).matrix, np.eye(4), atol=0)


@given(param_st(), st.integers(2, 5), st.floats(0.05, 3.0))
def test_step_is_a_contraction(p, N, s):
    sv = np.linalg.svd(build_U_closed(1, N, p, s).matrix, compute_uv=False)
    assert sv[0] <= 1.0 + 1e-12
    # untouched chain modes keep unit singular values
    assert np.sum(np.abs(sv - 1.0) < 1e-12) >= N - 1


def test_undamped_step_is_unitary():
    p = ModelParams(1.2, 0.9, 0.7, 1.3, 0.0, 0.0)  # no damping; not admissible, used as a limit
    U = build_U_closed(1, 3, p).matrix
    assert np.allclose(U.conj().T @ U, np.eye(4), atol=1e-13)


def test_step_derivative_matches_generator(warm_params):
    p, s, h = warm_params, 0.7, 1e-6
    gen = build_Y(1, 2, p).Y + 0.5j * p.gamma * build_Y(1, 2, p).P0
    dU = (build_U_closed(1, 2, p, s + h).matrix - build_U_closed(1, 2, p, s - h).matrix) / (2 * h)
    assert np.max(np.abs(dU - 1j * gen @ build_U_closed(1, 2, p, s).matrix)) <= 1e-8


def test_decoupled_step_is_diagonal():
    p = ModelParams(1.0, 2.0, 0.0, 1.0, 0.3, 0.1)
    U = build_U_closed(1, 2, p).matrix
    assert np.count_nonzero(U - np.diag(np.diag(U))) == 0


@given(param_st(), st.integers(1, 6), st.data())
def test_propagate_matches_dense_product(p, N, data):
    steps = data.draw(st.lists(st.integers(1, N), min_size=0, max_size=8))
    z = np.array(data.draw(labels(N + 1)))
    M = np.eye(N + 1, dtype=complex)
    for ell in steps:
        M = M @ build_U_closed(ell, N, p).matrix
    assert np.max(np.abs(propagate(z, steps, p) - M @ z)) <= 1e-12


@given(param_st(), labels(4), labels(4), st.builds(complex, st.floats(-2, 2), st.floats(-2, 2)))
def test_propagate_is_linear(p, a, b, c):
    a, b = np.array(a), np.array(b)
    lhs = propagate(a + c * b, [1, 2, 3], p)
    rhs = propagate(a, [1, 2, 3], p) + c * propagate(b, [1, 2, 3], p)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


@given(param_st(), labels(4))
def test_propagate_does_not_increase_norm(p, z):
    z = np.array(z)
    assert np.linalg.norm(propagate(z, [3, 1, 2, 1], p)) <= np.linalg.norm(z) + 1e-12


def test_propagate_trailing_axes(warm_params, rng):
    Z = rng.normal(size=(4, 5)) + 1j * rng.normal(size=(4, 5))
    out = propagate(Z, [1, 2, 3], warm_params)
    for j in range(5):
        assert np.allclose(out[:, j], propagate(Z[:, j], [1, 2, 3], warm_params), atol=0)


def test_propagate_partial_durations(warm_params, rng):
    z = rng.normal(size=3) + 1j * rng.normal(size=3)
    out = propagate(z, [1, 2], warm_params, [1.0, 0.25])
    ref = build_U_closed(1, 2, warm_params, 1.0).matrix @ build_U_closed(2, 2, warm_params, 0.25).matrix @ z
    assert np.allclose(out, ref, atol=1e-14)
    with pytest.raises(ValueError):
        propagate(z, [1, 2], warm_params, [1.0])


def test_propagate_rejects_bad_step(warm_params):
    with pytest.raises(IndexOutOfRange):
        propagate(np.ones(3), [3], warm_params)


def test_propagation_matrix_columns(warm_params):
    M = propagation_matrix([1, 2, 3], 3, warm_params)
    ref = build_U_closed(1, 3, warm_params).matrix @ build_U_closed(2, 3, warm_params).matrix \
        @ build_U_closed(3, 3, warm_params).matrix
    assert np.allclose(M, ref, atol=1e-15)


@given(param_st(), st.integers(1, 12), st.data())
def test_cavity_formula_matches_propagation(p, N, data):
    m = data.draw(st.integers(1, N))
    e = np.zeros(N + 1, dtype=complex)
    e[0] = 1
    ref = propagate(e, range(1, m + 1), p)
    assert np.max(np.abs(component_formula_e(m, N, p) - ref)) <= 1e-12


def test_cavity_formula_golden(golden_params):
    b = propagator_blocks(golden_params, 1.0)
    out = component_formula_e(2, 3, golden_params)
    ph = np.exp(2j)
    assert np.allclose(out, ph * np.array([b.gz ** 2, b.gw * b.gz, b.gw, 0]), atol=1e-16)


@given(param_st(), st.integers(2, 12), st.data(),
       st.builds(complex, st.floats(-1, 1), st.floats(-1, 1)),
       st.builds(complex, st.floats(-1, 1), st.floats(-1, 1)))
def test_pair_formulas_match_propagation(p, N, data, a1, a2):
    n = data.draw(st.integers(1, N))
    z = np.zeros(N + 1, dtype=complex)
    z[0], z[n] = a1, a2
    ref = propagate(z, range(1, N + 1), p)
    assert np.max(np.abs(component_formula_pair("cavity-chain", (n,), N, p, (a1, a2)) - ref)) <= 1e-12
    m = data.draw(st.integers(1, N - 1))
    n = data.draw(st.integers(m + 1, N))
    z = np.zeros(N + 1, dtype=complex)
    z[m], z[n] = a1, a2
    ref = propagate(z, range(1, N + 1), p)
    assert np.max(np.abs(component_formula_pair("chain-chain", (m, n), N, p, (a1, a2)) - ref)) <= 1e-12


def test_pair_formula_errors(golden_params):
    with pytest.raises(BadKind):
        component_formula_pair("chain-cavity", (1,), 3, golden_params, (1, 0))
    with pytest.raises(IndexOutOfRange):
        component_formula_pair("chain-chain", (2, 2), 3, golden_params, (1, 0))
    with pytest.raises(IndexOutOfRange):
        component_formula_pair("cavity-chain", (4,), 3, golden_params, (1, 0))
