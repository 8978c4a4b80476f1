import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from latcft.errors import ConfigError, DegenerateGroundState, LatticeTooLarge
from latcft.fock import to_fock
from latcft.lattice import (
    QuadraticOperator,
    build_spec,
    build_staggered_hamiltonian,
    commutator,
    covariance_csv,
    diagonalize,
    fourier_matrix,
    ground_state,
    number_operator,
    parse_config,
    quasiparticle_transform,
    read_covariance_csv,
    spec_from_config,
    state_parity,
)

from conftest import dense_covariance


def test_spec_geometry():
    spec = build_spec(3, L=2.0)
    assert spec.n_sites == 16 and spec.n_modes == 32
    assert spec.eps == pytest.approx(0.25)
    assert spec.coupling == pytest.approx(2.0 / (np.pi * 0.25))
    assert spec.mode_positions[0] == pytest.approx(-2.0)
    assert np.allclose(np.diff(spec.mode_positions), spec.fine_eps)


@pytest.mark.parametrize("sector, first", [("NS", -15.5), ("R", -15.0)])
def test_momentum_grid(sector, first):
    spec = build_spec(3, sector=sector)
    q = spec.momentum_grid * spec.L / np.pi
    assert q[0] == pytest.approx(first)
    assert len(q) == spec.n_modes
    neg = spec.negated_index()
    assert np.allclose(np.mod(q[neg] + q, 32), 0)


@pytest.mark.parametrize("bad", [dict(N=-1), dict(N=2.5), dict(N=2, L=0.0), dict(N=2, sector="X")])
def test_build_spec_rejects(bad):
    with pytest.raises(ConfigError):
        build_spec(**bad)


def test_lattice_cap():
    with pytest.raises(LatticeTooLarge):
        build_spec(13)
    assert build_spec(13, max_scale=13).N == 13


def test_config_roundtrip():
    spec = build_spec(4, L=1.5, lam=0.25, sector="R")
    assert spec_from_config(spec.to_config()) == spec
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("N=3\nnot a pair\n")


def test_fourier_unitary():
    F = fourier_matrix(build_spec(2))
    assert np.allclose(F @ F.conj().T, np.eye(len(F)))


@pytest.mark.parametrize("sector", ["NS", "R"])
@pytest.mark.parametrize("lam", [0.0, 0.6, -0.4])
def test_quasiparticles_diagonalize(sector, lam):
    spec = build_spec(2, lam=lam, sector=sector)
    sd = diagonalize(spec)
    T = quasiparticle_transform(spec, sd)
    m = spec.n_modes
    assert np.allclose(T @ T.conj().T, np.eye(2 * m), atol=1e-12)
    M = build_staggered_hamiltonian(spec).bdg()
    D = T @ M @ T.conj().T
    assert np.allclose(D, np.diag(np.concatenate([sd.omega, -sd.omega])), atol=1e-12)


def test_massless_dispersion():
    spec = build_spec(3)
    sd = diagonalize(spec)
    expect = 2 * spec.coupling * np.abs(np.sin(spec.momentum_grid * spec.fine_eps))
    assert np.allclose(sd.omega, expect)
    assert not sd.has_zero_mode


def test_ramond_zero_modes():
    spec = build_spec(2, sector="R")
    sd = diagonalize(spec)
    assert np.allclose(np.sort(sd.momenta[sd.zero_modes] * spec.L / np.pi), [0.0, 8.0])
    with pytest.raises(DegenerateGroundState):
        ground_state(spec)
    for p in (1, -1):
        assert ground_state(spec, parity=p).parity == p


@pytest.mark.parametrize(
    "N, sector, lam, parity",
    [(0, "NS", 0.0, None), (0, "NS", 0.8, None), (0, "R", 0.5, None), (0, "R", -0.5, None), (0, "R", 0.0, 1), (0, "R", 0.0, -1), (1, "NS", 0.3, None)],
)
def test_ground_state_matches_fock(N, sector, lam, parity):
    spec = build_spec(N, lam=lam, sector=sector)
    H = build_staggered_hamiltonian(spec)
    st_ = ground_state(spec, parity)
    Hd = to_fock(H).toarray()
    w, V = np.linalg.eigh(Hd)
    # energy of the Gaussian state equals the exact minimum in its parity sector
    assert st_.expect(H).real == pytest.approx(diagonalize(spec).offset, abs=1e-10)
    from latcft.fock import parity_operator

    P = parity_operator(spec.n_modes).toarray()
    # lowest level in the state's parity sector: push the other sector up
    penalty = 1e3 * (np.eye(len(P)) - st_.parity * P) / 2
    assert st_.expect(H).real == pytest.approx(np.linalg.eigvalsh(Hd + penalty)[0], abs=1e-9)
    assert state_parity(st_) == pytest.approx(st_.parity, abs=1e-9)
    if parity is None:
        assert st_.expect(H).real == pytest.approx(w[0], abs=1e-9)
        assert np.allclose(st_.covariance, dense_covariance(V[:, 0], spec.n_modes), atol=1e-9)
    st_.check()
    assert st_.is_pure()


def test_covariance_csv_roundtrip(tmp_path):
    spec = build_spec(1)
    st_ = ground_state(spec)
    path = tmp_path / "g.csv"
    path.write_text(covariance_csv(spec, st_, "position"))
    head, G = read_covariance_csv(path)
    assert head[0] == "a[0]" and len(head) == 2 * spec.n_modes
    assert np.allclose(G, st_.covariance, atol=1e-14)
    text = covariance_csv(spec, st_)
    assert text.splitlines()[0].startswith("row,a(-3.5)")


def _random_op(seed, m, hermitian):
    from latcft.gaussian import random_quadratic

    return random_quadratic(m, np.random.default_rng(seed), hermitian)


@given(st.integers(0, 10**6), st.integers(0, 10**6), st.booleans())
def test_commutator_matches_fock(s1, s2, herm):
    m = 3
    X, Y = _random_op(s1, m, herm), _random_op(s2, m, True)
    Fx, Fy = to_fock(X).toarray(), to_fock(Y).toarray()
    assert np.allclose(to_fock(commutator(X, Y)).toarray(), Fx @ Fy - Fy @ Fx, atol=1e-10)


@given(st.integers(0, 10**6))
def test_operator_algebra_matches_fock(seed):
    X = _random_op(seed, 3, False)
    Y = _random_op(seed + 1, 3, False)
    z = 0.3 - 1.2j
    Fx, Fy = to_fock(X).toarray(), to_fock(Y).toarray()
    assert np.allclose(to_fock(X + z * Y).toarray(), Fx + z * Fy, atol=1e-10)
    assert np.allclose(to_fock(X.adjoint()).toarray(), Fx.conj().T, atol=1e-10)
    assert np.allclose(to_fock(QuadraticOperator.from_bdg(X.bdg(), X.constant)).toarray(), Fx, atol=1e-10)


def test_number_operator_counts():
    N = to_fock(number_operator(3)).toarray()
    assert np.allclose(np.sort(np.linalg.eigvalsh(N)), [0, 1, 1, 1, 2, 2, 2, 3])


def test_antisymmetry_enforced():
    with pytest.raises(ValueError):
        QuadraticOperator(np.zeros((2, 2)), np.ones((2, 2)))
