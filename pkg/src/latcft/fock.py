"""Exact many-body operators on small chains, used as an independent check.

Spin conventions: qubit 0 is the most significant bit of a basis index and
the Jordan-Wigner map is

    a_j = X_0 ... X_{j-1} (Z_j + i Y_j) / 2,

so that ``a+_j a_j = (1 + X_j) / 2`` and the fermion vacuum on a site is the
``-1`` eigenvector of ``X``.
"""

from __future__ import annotations

from functools import reduce

import numpy as np
import scipy.sparse as sp

from .errors import TooManyQubits
from .lattice import QuadraticOperator, _sector

MAX_FOCK_MODES = 16

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_LOWER = 0.5 * (PAULI["Z"] + 1j * PAULI["Y"])


def _check_size(m: int) -> None:
    if m > MAX_FOCK_MODES:
        raise TooManyQubits(f"{m} modes exceed the exact-state limit of {MAX_FOCK_MODES}")


def kron_list(mats) -> sp.csr_matrix:
    return reduce(lambda x, y: sp.kron(x, y, format="csr"), [sp.csr_matrix(a) for a in mats])


def pauli_string(label: str) -> sp.csr_matrix:
    """Sparse matrix of a Pauli word such as ``"XIZY"`` (leftmost = qubit 0)."""
    _check_size(len(label))
    return kron_list([PAULI[c] for c in label])


def annihilators(m: int) -> list[sp.csr_matrix]:
    """Sparse ``a_j`` for ``j < m``."""
    _check_size(m)
    I, X = PAULI["I"], PAULI["X"]
    return [kron_list([X] * j + [_LOWER] + [I] * (m - j - 1)) for j in range(m)]


def parity_operator(m: int) -> sp.csr_matrix:
    """``(-1)^F = prod_j (-X_j)``."""
    return ((-1) ** m) * pauli_string("X" * m)


def to_fock(op: QuadraticOperator, ops: list | None = None) -> sp.csr_matrix:
    """Matrix of a quadratic operator in the ``2^m`` dimensional Fock space."""
    m = op.n_modes
    a = annihilators(m) if ops is None else ops
    ad = [x.conj().T.tocsr() for x in a]
    d = 2**m
    out = sp.identity(d, dtype=complex, format="csr") * op.offset
    for p, q in zip(*np.nonzero(op.A)):
        out = out + op.A[p, q] * (ad[p] @ a[q])
    for p, q in zip(*np.nonzero(op.B)):
        out = out + 0.5 * op.B[p, q] * (ad[p] @ ad[q])
    for p, q in zip(*np.nonzero(op.C)):
        out = out + 0.5 * op.C[p, q] * (a[p] @ a[q])
    return out.tocsr()


def _bond(m: int, i: int, j: int, w: dict[str, float]) -> sp.csr_matrix:
    out = sp.csr_matrix((2**m, 2**m), dtype=complex)
    for P, c in w.items():
        lab = ["I"] * m
        lab[i] = lab[j] = P
        out = out + c * pauli_string("".join(lab))
    return out


def spin_hamiltonian(n_sites: int, L: float = 1.0, lam: float = 0.0, sector: str = "NS") -> sp.csr_matrix:
    """Spin-chain form of the staggered Hamiltonian.

    A translation invariant ``ZZ - YY`` chain with a transverse ``X`` field,
    plus a boundary term on the seam bond that depends on the total parity
    and the sector.
    """
    eta = -1 if _sector(sector) == "NS" else 1
    m = 2 * n_sites
    _check_size(m)
    J = L / (np.pi * (2.0 * L / n_sites))
    H = sp.csr_matrix((2**m, 2**m), dtype=complex)
    for j in range(m):
        H = H + 0.5 * J * _bond(m, j, (j + 1) % m, {"Z": 1.0, "Y": -1.0})
    for j in range(m):
        lab = ["I"] * m
        lab[j] = "X"
        H = H + 0.5 * J * lam * pauli_string("".join(lab))
    seam = _bond(m, 0, m - 1, {"Z": 1.0, "Y": -1.0})
    P = parity_operator(m)
    bc = -0.5 * J * (seam + eta * (P @ seam))
    return (H + bc).tocsr()


def ground_energy(H: sp.spmatrix, k: int = 1) -> np.ndarray:
    """Lowest eigenvalues of a sparse Hermitian matrix (dense for small sizes)."""
    if H.shape[0] <= 4096:
        return np.linalg.eigvalsh(H.toarray())[:k]
    from scipy.sparse.linalg import eigsh

    return np.sort(eigsh(H, k=k, which="SA")[0])
