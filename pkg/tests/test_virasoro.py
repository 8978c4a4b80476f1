import numpy as np
import pytest

from latcft.errors import MassiveDensityUnsupported, NyquistViolation, UndefinedForUnitK
from latcft.fock import to_fock
from latcft.lattice import build_spec, build_staggered_hamiltonian, commutator
from latcft.virasoro import (
    central_charge_estimate,
    hamiltonian_density_modes,
    koo_saleur,
    koo_saleur_factor,
    koo_saleur_limit,
    koo_saleur_momentum_block,
    lattice_momentum_operator,
    reflect,
    to_momentum,
)

# frozen from the projected estimator (deterministic linear algebra)
C12_SERIES = {3: 0.46493945220095867, 4: 0.49085094984419086, 5: 0.4976734982362956, 6: 0.49941406120683496, 7: 0.4998530143293465}


def _block_error(spec, kappa, variant="corrected"):
    k = kappa * np.pi / spec.L
    op = koo_saleur_limit(spec) if kappa == 0 else koo_saleur(spec, k).payload
    Mk, ck = to_momentum(spec, op)
    blk = koo_saleur_momentum_block(spec, k, variant)
    return max(float(np.max(np.abs(blk.bdg().toarray() - Mk))), abs(blk.constant - ck))


@pytest.mark.parametrize("sector", ["NS", "R"])
def test_density_zero_mode_is_hamiltonian(sector):
    spec = build_spec(3, sector=sector)
    h0 = hamiltonian_density_modes(spec, 0.0)
    H0 = build_staggered_hamiltonian(spec)
    assert np.allclose(h0.bdg(), H0.bdg())
    assert h0.constant == pytest.approx(H0.constant)


@pytest.mark.parametrize("c", [0.0, 0.5, 1.0])
def test_zero_mode_convention(c):
    spec = build_spec(2)
    L0 = koo_saleur(spec, 0.0, c).payload
    H0 = build_staggered_hamiltonian(spec)
    assert np.allclose(L0.bdg(), 0.5 * H0.bdg())
    assert L0.constant == pytest.approx(0.5 * H0.constant + c / 24)
    assert L0.is_hermitian()


@pytest.mark.parametrize("kappa", [1, 2, 3])
def test_adjoint_pairs(kappa):
    spec = build_spec(3)
    k = kappa * np.pi
    Lk = koo_saleur(spec, k).payload
    Lmk = koo_saleur(spec, -k).payload
    assert np.allclose(Lk.adjoint().bdg(), Lmk.bdg(), atol=1e-12)


def test_commutator_form_matches_dense():
    spec = build_spec(1)
    k = np.pi
    Hk = to_fock(hamiltonian_density_modes(spec, k)).toarray()
    H0 = to_fock(build_staggered_hamiltonian(spec)).toarray()
    f = koo_saleur_factor(spec, k)
    dense = 0.5 * (Hk + f * (Hk @ H0 - H0 @ Hk))
    assert np.allclose(to_fock(koo_saleur(spec, k).payload).toarray(), dense, atol=1e-11)


@pytest.mark.parametrize("N", [1, 2, 3, 4])
@pytest.mark.parametrize("sector", ["NS", "R"])
def test_cross_formula(N, sector):
    spec = build_spec(N, sector=sector)
    for kappa in range(-4, 5):
        if abs(kappa) * np.pi / spec.L < np.pi / spec.eps:
            assert _block_error(spec, kappa) <= 1e-10


def test_printed_kernel_disagrees():
    spec = build_spec(3)
    assert _block_error(spec, 2, "printed") > 1e-3
    assert _block_error(spec, 0, "printed") <= 1e-10


@pytest.mark.parametrize("N", [2, 4])
@pytest.mark.parametrize("sector", ["NS", "R"])
def test_reflection_exchanges_chiralities(N, sector):
    spec = build_spec(N, sector=sector)
    for kappa in (1, 2, -3):
        g = koo_saleur(spec, kappa * np.pi)
        left, right = g.payload, koo_saleur(spec, kappa * np.pi, chirality="right").payload
        assert np.allclose(reflect(spec, left).bdg(), right.bdg(), atol=1e-12)
    H0 = build_staggered_hamiltonian(spec)
    L0, L0bar = koo_saleur_limit(spec), koo_saleur_limit(spec, "right")
    assert np.allclose((L0 + L0bar).bdg(), H0.bdg(), atol=1e-12)
    assert np.allclose(reflect(spec, L0).bdg(), L0bar.bdg(), atol=1e-12)


def test_momentum_operator_commutes_with_hamiltonian():
    spec = build_spec(3)
    P = lattice_momentum_operator(spec)
    H0 = build_staggered_hamiltonian(spec)
    assert np.max(np.abs(commutator(P, H0).bdg())) < 1e-12
    assert P.is_hermitian()


def test_hermitian_combination():
    spec = build_spec(2)
    g = koo_saleur(spec, 2 * np.pi, chirality="hermitian", phi=0.3)
    assert g.payload.is_hermitian()
    assert g.kappa == 2
    expect = np.exp(0.3j) * koo_saleur(spec, 2 * np.pi).payload + np.exp(-0.3j) * koo_saleur(spec, -2 * np.pi).payload
    assert np.allclose(g.payload.bdg(), expect.bdg())


def test_guards():
    spec = build_spec(1)
    with pytest.raises(NyquistViolation):
        koo_saleur(spec, 2 * np.pi)
    with pytest.raises(MassiveDensityUnsupported):
        koo_saleur(build_spec(1, lam=0.2), np.pi)
    with pytest.raises(ValueError):
        koo_saleur(spec, 0.5)
    with pytest.raises(ValueError):
        koo_saleur(spec, np.pi, chirality="up")


@pytest.mark.parametrize("N", sorted(C12_SERIES))
def test_central_charge_frozen(N):
    spec = build_spec(N)
    c12 = central_charge_estimate(spec, 2 * np.pi, "c12")
    assert c12 == pytest.approx(C12_SERIES[N], abs=1e-12)
    assert central_charge_estimate(spec, 2 * np.pi, "c1") == pytest.approx(2 * c12, abs=1e-12)


def test_central_charge_monotone_in_N():
    devs = [abs(C12_SERIES[N] - 0.5) for N in sorted(C12_SERIES)]
    assert all(b < a for a, b in zip(devs, devs[1:]))


def test_defining_vacuum_has_no_anomaly():
    assert central_charge_estimate(build_spec(3), 2 * np.pi, "c0") == pytest.approx(0.0, abs=1e-10)


@pytest.mark.parametrize("kappa", [0, 1, -1])
def test_central_charge_undefined(kappa):
    with pytest.raises(UndefinedForUnitK):
        central_charge_estimate(build_spec(3), kappa * np.pi)
