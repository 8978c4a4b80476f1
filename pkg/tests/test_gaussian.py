import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given
from hypothesis import strategies as st

from latcft.errors import NonHermitianGenerator
from latcft.fock import annihilators, to_fock
from latcft.gaussian import (
    FermionField,
    conformal_correlator,
    correlator_scan,
    evolve,
    evolve_state,
    expectation,
    pfaffian,
    propagator,
    random_quadratic,
)
from latcft.lattice import GaussianState, QuadraticOperator

from conftest import dense_covariance

M = 3


def _pure_case(seed):
    """Random quadratic Hamiltonian, its Fock ground vector and Gaussian ground state."""
    rng = np.random.default_rng(seed)
    H = random_quadratic(M, rng)
    w, V = np.linalg.eigh(to_fock(H).toarray())
    psi = V[:, 0]
    return rng, H, psi, GaussianState(dense_covariance(psi, M), None, 1)


def _field_matrix(f: FermionField) -> np.ndarray:
    a = [x.toarray() for x in annihilators(M)]
    ops = a + [x.conj().T for x in a]
    return sum(c * o for c, o in zip(f.coef, ops))


def _random_field(rng):
    return FermionField(rng.normal(size=2 * M) + 1j * rng.normal(size=2 * M))


@given(st.integers(0, 10**6), st.sampled_from([2, 4, 6]))
def test_pfaffian_squares_to_determinant(seed, n):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    K = X - X.T
    assert np.isclose(pfaffian(K) ** 2, np.linalg.det(K), rtol=1e-9, atol=1e-9)


def test_pfaffian_known_values():
    assert pfaffian(np.array([[0, 2.0], [-2.0, 0]])) == pytest.approx(2.0)
    K = np.zeros((4, 4))
    K[0, 1], K[2, 3] = 1.0, 3.0
    K = K - K.T
    assert pfaffian(K) == pytest.approx(3.0)
    assert pfaffian(np.zeros((3, 3))) == 0


def test_ground_covariance_is_bdg_projector():
    _, H, psi, state = _pure_case(7)
    state.check()
    assert state.is_pure()
    assert state.expect(H).real == pytest.approx(np.vdot(psi, to_fock(H).toarray() @ psi).real)


@given(st.integers(0, 10**6), st.sampled_from([2, 4]))
def test_wick_fields_match_fock(seed, n):
    rng, _, psi, state = _pure_case(seed)
    fields = [_random_field(rng) for _ in range(n)]
    dense = psi
    for f in reversed(fields):
        dense = _field_matrix(f) @ dense
    assert np.isclose(expectation(state, fields), np.vdot(psi, dense), atol=1e-9)


def test_odd_products_vanish():
    rng, _, _, state = _pure_case(3)
    assert expectation(state, [_random_field(rng)] * 3) == 0


@given(st.integers(0, 10**6))
def test_mixed_products_match_fock(seed):
    rng, _, psi, state = _pure_case(seed)
    Q1, Q2 = random_quadratic(M, rng, False), random_quadratic(M, rng, False)
    f, g = _random_field(rng), _random_field(rng)
    F = lambda q: to_fock(q).toarray()
    cases = [
        ([Q1, Q2], F(Q1) @ F(Q2)),
        ([f, Q1, g], _field_matrix(f) @ F(Q1) @ _field_matrix(g)),
        ([Q1, f, Q2, g], F(Q1) @ _field_matrix(f) @ F(Q2) @ _field_matrix(g)),
    ]
    for items, dense in cases:
        assert np.isclose(expectation(state, items), np.vdot(psi, dense @ psi), atol=1e-8)


@given(st.integers(0, 10**6), st.floats(-2, 2))
def test_heisenberg_evolution_matches_fock(seed, t):
    rng, _, psi, state = _pure_case(seed)
    G = random_quadratic(M, rng)
    U = sla.expm(-1j * t * to_fock(G).toarray())
    f = _random_field(rng)
    assert np.allclose(_field_matrix(evolve(f, G, t)), U.conj().T @ _field_matrix(f) @ U, atol=1e-9)
    Q = random_quadratic(M, rng, False)
    assert np.allclose(to_fock(evolve(Q, G, t)).toarray(), U.conj().T @ to_fock(Q).toarray() @ U, atol=1e-9)
    moved = evolve_state(state, G, t)
    assert np.allclose(moved.covariance, dense_covariance(U @ psi, M), atol=1e-9)


def test_propagator_group_law(rng):
    G = random_quadratic(M, rng)
    assert np.allclose(propagator(G, 0.3) @ propagator(G, 0.4), propagator(G, 0.7))


def test_conformal_correlator_matches_fock(rng):
    _, _, psi, state = _pure_case(11)
    G = random_quadratic(M, rng)
    O = random_quadratic(M, rng)
    f = _random_field(rng)
    t = 0.8
    U = sla.expm(-1j * t * to_fock(G).toarray())
    dense = _field_matrix(f).conj().T @ U.conj().T @ to_fock(O).toarray() @ U @ _field_matrix(f)
    val = conformal_correlator(state, [f.adjoint()], [O], G, t, tail=[f])
    assert np.isclose(val, np.vdot(psi, dense @ psi), atol=1e-9)


def test_non_hermitian_generator_rejected(rng):
    with pytest.raises(NonHermitianGenerator):
        propagator(random_quadratic(M, rng, hermitian=False), 0.1)


def test_field_adjoint_and_algebra():
    f = FermionField.annihilator(2, 1, 2.0) + FermionField.creator(2, 0, 1j)
    assert np.allclose(_pad(f.adjoint().coef), _pad(np.array([-1j, 0, 0, 2.0])))
    assert np.allclose((3 * f).coef, 3 * f.coef)


def _pad(v):
    return np.asarray(v, dtype=complex)


@pytest.mark.parametrize("threads", [1, 3])
def test_correlator_scan_keeps_order(threads):
    out = correlator_scan(lambda a, b: a * 10 + b, [(i, i + 1) for i in range(20)], threads)
    assert out == [i * 10 + i + 1 for i in range(20)]
