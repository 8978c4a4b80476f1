import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, strategies as st

from latcft.circuits import (
    Circuit,
    apply_gadget,
    circuit_mode_unitary,
    circuit_unitary,
    exact_ground_vector,
    fermion_parity,
    fit_trotter,
    fourier_circuit,
    ground_state_prep_circuit,
    jordan_wigner,
    momentum_mode_field,
    pair_slots,
    pauli_sum_matrix,
    phase_estimation_plan,
    phase_estimation_readout,
    pipeline_correlator,
    state_fidelity,
    statevector_simulate,
    trotter_error,
    trotterize,
)
from latcft.errors import (
    DegenerateGroundState,
    NonHermitianGenerator,
    NonHermitianObservable,
    TooManyQubits,
    UnsupportedOrder,
)
from latcft.fock import annihilators, to_fock
from latcft.gaussian import random_quadratic
from latcft.lattice import build_spec, build_staggered_hamiltonian, fourier_matrix, number_operator
from latcft.virasoro import koo_saleur


@pytest.mark.parametrize("sector", ["NS", "R"])
@pytest.mark.parametrize("N", [0, 1])
def test_fourier_mode_matrix(N, sector):
    spec = build_spec(N, sector=sector)
    F = fourier_matrix(spec)[pair_slots(spec)]
    assert np.allclose(circuit_mode_unitary(fourier_circuit(spec)), F.conj().T, atol=1e-12)


def test_fourier_gate_counts():
    circ = fourier_circuit(build_spec(1))
    # radix-2 network on 8 modes
    assert circ.count("fourier") == 12


def test_pair_slots_adjacent():
    spec = build_spec(1)
    slots = pair_slots(spec)
    neg = spec.negated_index()
    assert sorted(slots) == list(range(spec.n_modes))
    assert all(neg[slots[r]] == slots[r + 1] for r in range(0, len(slots), 2))


@pytest.mark.parametrize("lam", [0.0, 0.7, -0.4])
@pytest.mark.parametrize("N", [0, 1])
def test_ground_state_fidelity(N, lam):
    spec = build_spec(N, lam=lam)
    psi = statevector_simulate(ground_state_prep_circuit(spec))
    assert state_fidelity(psi, exact_ground_vector(spec)) >= 1 - 1e-8


@pytest.mark.parametrize("lam", [0.5, -0.5])
def test_massive_ramond_ground_state(lam):
    spec = build_spec(1, lam=lam, sector="R")
    psi = statevector_simulate(ground_state_prep_circuit(spec))
    assert state_fidelity(psi, exact_ground_vector(spec)) >= 1 - 1e-8


def test_ns_ground_state_parity():
    spec = build_spec(1)
    psi = statevector_simulate(ground_state_prep_circuit(spec))
    assert fermion_parity(psi, spec.n_modes) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("parity", [1, -1])
def test_ramond_zero_mode_parity(parity):
    spec = build_spec(1, sector="R")
    psi = statevector_simulate(ground_state_prep_circuit(spec, parity=parity))
    m = spec.n_modes
    H = to_fock(build_staggered_hamiltonian(spec)).toarray()
    e0 = np.linalg.eigvalsh(H)[0]
    assert fermion_parity(psi, m) == pytest.approx(parity, abs=1e-12)
    assert np.vdot(psi, H @ psi).real == pytest.approx(e0, abs=1e-10)


def test_ramond_needs_parity():
    with pytest.raises(DegenerateGroundState):
        ground_state_prep_circuit(build_spec(1, sector="R"))


@pytest.mark.parametrize("j", [1, 2])
@pytest.mark.parametrize("kidx", [0, 3, 6])
def test_gadget_applies_mode_operator(kidx, j):
    spec = build_spec(1, lam=0.3)
    k = spec.momentum_grid[kidx]
    psi = statevector_simulate(ground_state_prep_circuit(spec))
    out, prob = apply_gadget(spec, psi, k, j)
    a = [x.toarray() for x in annihilators(spec.n_modes)]
    row = fourier_matrix(spec)[kidx]
    mode = sum(c * x for c, x in zip(row, a))
    dense = mode @ psi if j == 1 else mode.conj().T @ psi
    assert np.allclose(out, dense, atol=1e-12)
    assert prob == pytest.approx(np.vdot(dense, dense).real, abs=1e-12)
    f = momentum_mode_field(spec, k, j)
    assert f.n_modes == spec.n_modes


def test_jordan_wigner_matches_fock(rng):
    op = random_quadratic(3, rng)
    assert np.allclose(pauli_sum_matrix(jordan_wigner(op), 3), to_fock(op).toarray(), atol=1e-12)


@given(st.integers(0, 2**31 - 1))
def test_jordan_wigner_non_hermitian(seed):
    op = random_quadratic(2, np.random.default_rng(seed), hermitian=False)
    assert np.allclose(pauli_sum_matrix(jordan_wigner(op), 2), to_fock(op).toarray(), atol=1e-12)


@given(st.integers(0, 2**31 - 1))
def test_inverse_circuit(seed):
    spec = build_spec(0, lam=np.random.default_rng(seed).uniform(-1, 1))
    c = ground_state_prep_circuit(spec)
    U = circuit_unitary(Circuit(c.n_qubits, list(c.gates) + list(c.inverse().gates)))
    assert np.allclose(U, np.eye(len(U)), atol=1e-12)


@pytest.mark.parametrize("order", [1, 2])
def test_trotter_order(order, rng):
    gen = random_quadratic(3, rng)
    fit = fit_trotter(gen, 0.5, order=order)
    assert fit.order == pytest.approx(order, abs=0.1)
    assert fit.bound(64) >= fit.errors[-1] * (1 - 1e-12)


def test_trotter_of_chiral_generator():
    spec = build_spec(1)
    gen = koo_saleur(spec, np.pi).payload
    herm = 0.5 * (gen + gen.adjoint())
    err = trotter_error(herm, 0.5, 32, 2)
    assert err < 1e-2
    U = circuit_unitary(trotterize(herm, 0.5, 32))
    assert np.allclose(U.conj().T @ U, np.eye(len(U)), atol=1e-12)


def test_trotter_rejects():
    op = random_quadratic(2, np.random.default_rng(1), hermitian=False)
    with pytest.raises(NonHermitianGenerator):
        trotterize(op, 1.0, 4)
    with pytest.raises(UnsupportedOrder):
        trotterize(number_operator(2), 1.0, 4, order=4)


def test_pipeline_matches_gaussian():
    spec = build_spec(0)
    H0 = build_staggered_hamiltonian(spec)
    k = spec.momentum_grid[1]
    res = pipeline_correlator(spec, H0, number_operator(spec.n_modes), k, 0.5, steps=16)
    assert abs(res["statevector"] - res["gaussian"]) < 1e-10
    out = pipeline_correlator(spec, H0, H0, k, 0.5, steps=32)
    assert abs(out["statevector"] - out["gaussian"]) < 1e-6
    assert out["probability"] == pytest.approx(out["norm"].real, abs=1e-12)


@pytest.mark.parametrize("r", [4, 5, 6])
def test_phase_estimation(r):
    spec = build_spec(0)
    H0 = build_staggered_hamiltonian(spec)
    psi = exact_ground_vector(spec)
    e0 = np.vdot(psi, to_fock(H0).toarray() @ psi).real
    plan = phase_estimation_plan(H0, r)
    probs, mean = phase_estimation_readout(plan, psi)
    assert probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert abs(mean - e0) < plan.resolution


def test_phase_estimation_rejects_non_hermitian():
    op = random_quadratic(2, np.random.default_rng(2), hermitian=False)
    with pytest.raises(NonHermitianObservable):
        phase_estimation_plan(op, 3)


def test_too_many_qubits():
    with pytest.raises(TooManyQubits):
        statevector_simulate(Circuit(21))


def test_text_export():
    c = Circuit(2)
    c.add("fswap", (0, 1))
    c.add("phase", (1,), 0.25)
    lines = c.to_text().strip().splitlines()
    assert lines[-2].startswith("fswap") and "0.25" in lines[-1]
    with pytest.raises(ValueError):
        c.add("phase", (5,), 0.1)
    with pytest.raises(ValueError):
        c.add("phase", (0,), np.nan)


def test_fswap_exchanges_modes():
    c = Circuit(2)
    c.add("fswap", (0, 1))
    a0, a1 = (x.toarray() for x in annihilators(2))
    U = circuit_unitary(c)
    assert np.allclose(U @ a0.conj().T @ U.conj().T, a1.conj().T, atol=1e-12)
    assert np.allclose(sla.expm(np.zeros((2, 2))), np.eye(2))
