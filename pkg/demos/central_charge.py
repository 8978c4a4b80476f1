"""Central charge read off the lattice Virasoro commutator as the chain grows."""

import numpy as np

from latcft.lattice import build_spec
from latcft.virasoro import central_charge_estimate

print(" N  sites  c (one Majorana)  c (Dirac)")
for N in range(3, 8):
    spec = build_spec(N)
    c12 = central_charge_estimate(spec, 2 * np.pi, "c12")
    c1 = central_charge_estimate(spec, 2 * np.pi, "c1")
    print(f"{N:2d}  {spec.n_sites:5d}  {c12:16.10f}  {c1:9.6f}")
