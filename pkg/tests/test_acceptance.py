"""One test per acceptance criterion; each prints a PASS/FAIL line with its measured value."""

import time

import numpy as np
import pytest

from latcft.circuits import (
    exact_ground_vector,
    fit_trotter,
    ground_state_prep_circuit,
    pipeline_correlator,
    state_fidelity,
    statevector_simulate,
)
from latcft.erroranalysis import fit_decay, momentum_error_curve, sobolev_norm, two_point_error_curve
from latcft.fock import spin_hamiltonian, to_fock
from latcft.lattice import build_spec, build_staggered_hamiltonian, ground_state, staggered_chain
from latcft.oar import SUPPORTED_ORDERS, coarse_grain_state, covariance_distance, daubechies_filter
from latcft.virasoro import (
    central_charge_estimate,
    koo_saleur,
    koo_saleur_limit,
    koo_saleur_momentum_block,
    to_momentum,
)

PRINTED_D4 = np.array([1 + np.sqrt(3), 3 + np.sqrt(3), 3 - np.sqrt(3), 1 - np.sqrt(3)]) / (4 * np.sqrt(2))


@pytest.fixture
def report(capsys):
    start = time.perf_counter()

    def emit(number: int, ok: bool, text: str, budget: float):
        elapsed = time.perf_counter() - start
        ok = ok and elapsed < budget
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {text} [{elapsed:.1f} s of {budget:.0f} s]")
        assert ok

    return emit


def test_spin_fermion_equivalence(report):
    worst = 0.0
    for n in (2, 4, 6):
        for sector in ("NS", "R"):
            Hs = spin_hamiltonian(n, 1.0, 0.0, sector)
            Hf = to_fock(staggered_chain(n, 1.0, 0.0, sector))
            worst = max(worst, abs(Hs - Hf).max())
    report(1, worst <= 1e-12, f"spin vs fermion max entry error {worst:.2e} (tol 1e-12)", 10)


def test_momentum_rg_fixed_point(report):
    fine = ground_state(build_spec(6))
    dist = covariance_distance(coarse_grain_state(fine, 4), ground_state(build_spec(4)))
    report(2, dist <= 1e-10, f"N=6 -> N=4 covariance deviation {dist:.2e} (tol 1e-10)", 10)


def test_cross_formula(report):
    worst = 0.0
    for N in range(0, 7):
        for sector in ("NS", "R"):
            spec = build_spec(N, sector=sector)
            for kappa in range(-4, 5):
                k = kappa * np.pi / spec.L
                if abs(k) >= np.pi / spec.eps:
                    continue
                op = koo_saleur_limit(spec) if kappa == 0 else koo_saleur(spec, k).payload
                Mk, ck = to_momentum(spec, op)
                blk = koo_saleur_momentum_block(spec, k)
                worst = max(worst, float(np.max(np.abs(blk.bdg().toarray() - Mk))), abs(blk.constant - ck))
    report(3, worst <= 1e-10, f"commutator vs block form max error {worst:.2e} over N<=6, |k|<=4pi/L (tol 1e-10)", 60)


def test_central_charge(report):
    est = {N: central_charge_estimate(build_spec(N), 2 * np.pi, "c12") for N in range(3, 8)}
    dev = [abs(est[N] - 0.5) for N in range(3, 8)]
    monotone = all(b < a for a, b in zip(dev, dev[1:]))
    ok = dev[3] <= 0.5 and monotone
    report(4, ok, f"c(N=6) = {est[6]:.6f}, deviation {dev[3]:.2e} (tol 0.5), monotone over N=3..7: {monotone}", 120)


def test_two_point_decay(report):
    fit = fit_decay(two_point_error_curve(range(3, 9)))
    report(5, abs(fit.exponent + 2.0) <= 0.3, f"two-point error decay exponent {fit.exponent:.3f} (target -2.0 +- 0.3)", 60)


def test_moebius_nullity(report):
    worst = 0.0
    for kappa in (0, 1, -1):
        for M in (1, 2):
            curve = momentum_error_curve(kappa, M, range(M + 1, 11), "HSoffdiagonal")
            worst = max(worst, max(curve.values))
    report(6, worst <= 1e-13, f"HS off-diagonal error for k=0,+-pi/L up to N=10: max {worst:.2e} (tol 1e-13)", 60)


def test_circuit_oracle(report):
    spec = build_spec(1)
    assert spec.n_sites == 4
    fid = state_fidelity(statevector_simulate(ground_state_prep_circuit(spec)), exact_ground_vector(spec))
    gen = koo_saleur(spec, np.pi / spec.L, chirality="hermitian").payload
    obs = build_staggered_hamiltonian(spec)
    res = pipeline_correlator(spec, gen, obs, 0.5 * np.pi / spec.L, 0.5, 64, 2)
    fit = fit_trotter(gen, 0.5, order=2)
    norm_obs = 0.25 * float(np.sum(np.abs(np.linalg.eigvalsh(obs.bdg())))) + abs(obs.constant)
    bound = 2 * norm_obs * fit.bound(64)
    disc = abs(res["statevector"] - res["gaussian"])
    ok = fid >= 1 - 1e-8 and disc <= bound and abs(fit.order - 2) <= 0.2
    report(7, ok, f"infidelity {max(1 - fid, 0.0):.1e}, correlator gap {disc:.2e} <= bound {bound:.2e}, Trotter order {fit.order:.3f}", 300)


def test_wavelet_layer(report):
    d4 = np.max(np.abs(daubechies_filter(4).coefficients - PRINTED_D4))
    inv = max(max(daubechies_filter(K).invariant_errors()) for K in SUPPORTED_ORDERS)
    haar = daubechies_filter(2)
    s0 = sobolev_norm(haar, 0.0)
    s6 = sobolev_norm(haar, 0.6)
    ok = d4 <= 1e-12 and inv <= 1e-12 and abs(s0.value - 1) <= 1e-6 and s6.divergent
    report(8, ok, f"D4 error {d4:.1e}, filter invariants {inv:.1e}, Haar norm {s0.value:.8f} at 0, divergent at 0.6: {s6.divergent}", 30)
