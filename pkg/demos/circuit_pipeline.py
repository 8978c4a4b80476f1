"""Prepare the 4-site ground state on qubits, insert a field mode, evolve and compare.

The statevector result is checked against the free-fermion engine, and the
gap is compared with the fitted Trotter envelope.
"""

import numpy as np

from latcft.circuits import (
    exact_ground_vector,
    fit_trotter,
    ground_state_prep_circuit,
    pipeline_correlator,
    state_fidelity,
    statevector_simulate,
)
from latcft.lattice import build_spec, build_staggered_hamiltonian
from latcft.virasoro import koo_saleur

spec = build_spec(1)
prep = ground_state_prep_circuit(spec)
psi = statevector_simulate(prep)
print(f"{spec.n_modes} qubits, {len(prep.gates)} gates "
      f"({prep.count('fourier')} fourier, {prep.count('bogoliubov')} bogoliubov)")
print(f"ground-state fidelity: {state_fidelity(psi, exact_ground_vector(spec)):.15f}")

gen = koo_saleur(spec, np.pi, chirality="hermitian").payload
obs = build_staggered_hamiltonian(spec)
for steps in (8, 16, 32, 64):
    res = pipeline_correlator(spec, gen, obs, 0.5 * np.pi, 0.5, steps)
    print(f"steps {steps:3d}: statevector {res['statevector'].real:+.10f}  "
          f"gaussian {res['gaussian'].real:+.10f}")
fit = fit_trotter(gen, 0.5)
print(f"fitted Trotter order {fit.order:.3f}")
