"""Free-fermion engine: Heisenberg evolution and Wick contractions.

Linear fields are stored as coefficient vectors over ``alpha = (a, a+)``.
The two-point matrix ``<alpha_i alpha_j>`` of a state with covariance
``Gamma`` (``Gamma_ij = <alpha_i+ alpha_j>``) is ``S Gamma`` where ``S`` swaps
the particle and hole halves.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import NonHermitianGenerator
from .lattice import GaussianState, QuadraticOperator


def pfaffian(K: np.ndarray) -> complex:
    """Pfaffian of an antisymmetric matrix by pivoted Parlett-Reid elimination."""
    A = np.array(K, dtype=complex)
    n = A.shape[0]
    if n % 2:
        return 0.0
    pf = 1.0 + 0j
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(A[k + 1 :, k])))
        if kp != k + 1:
            A[[k + 1, kp], :] = A[[kp, k + 1], :]
            A[:, [k + 1, kp]] = A[:, [kp, k + 1]]
            pf = -pf
        if A[k + 1, k] == 0:
            return 0.0
        pf *= A[k, k + 1]
        if k + 2 < n:
            tau = A[k, k + 2 :] / A[k, k + 1]
            col = A[k + 2 :, k + 1].copy()
            A[k + 2 :, k + 2 :] += np.outer(tau, col) - np.outer(col, tau)
    return pf


def _swap(m: int) -> np.ndarray:
    Z = np.zeros((m, m))
    I = np.eye(m)
    return np.block([[Z, I], [I, Z]])


@dataclass(frozen=True, eq=False)
class FermionField:
    """Linear combination ``sum_i coef_i alpha_i`` of annihilators and creators."""

    coef: np.ndarray

    @property
    def n_modes(self) -> int:
        return len(self.coef) // 2

    @classmethod
    def annihilator(cls, m: int, p: int, amplitude: complex = 1.0) -> "FermionField":
        v = np.zeros(2 * m, dtype=complex)
        v[p] = amplitude
        return cls(v)

    @classmethod
    def creator(cls, m: int, p: int, amplitude: complex = 1.0) -> "FermionField":
        v = np.zeros(2 * m, dtype=complex)
        v[m + p] = amplitude
        return cls(v)

    @classmethod
    def from_modes(cls, u: np.ndarray, creation: bool = False) -> "FermionField":
        """``sum_p u_p a_p`` or, with ``creation``, ``sum_p u_p a+_p``."""
        u = np.asarray(u, dtype=complex)
        z = np.zeros_like(u)
        return cls(np.concatenate([z, u]) if creation else np.concatenate([u, z]))

    def adjoint(self) -> "FermionField":
        m = self.n_modes
        return FermionField(np.concatenate([self.coef[m:], self.coef[:m]]).conj())

    def __mul__(self, z) -> "FermionField":
        return FermionField(complex(z) * self.coef)

    __rmul__ = __mul__

    def __add__(self, other: "FermionField") -> "FermionField":
        return FermionField(self.coef + other.coef)


def pairing_matrix(state: GaussianState) -> np.ndarray:
    """``<alpha_i alpha_j>`` for every pair of Nambu components."""
    return _swap(state.n_modes) @ state.covariance


def _wick(vectors: list[np.ndarray], G: np.ndarray) -> complex:
    n = len(vectors)
    if n == 0:
        return 1.0
    if n % 2:
        return 0.0
    V = np.array(vectors)
    K = V @ G @ V.T
    K = np.triu(K, 1)
    return pfaffian(K - K.T)


def _quadratic_form(op: QuadraticOperator) -> tuple[np.ndarray, complex]:
    """``op = alpha^T Q alpha + c``."""
    m = op.n_modes
    return 0.5 * _swap(m) @ op.bdg(), op.constant


def _two_quadratic(Q1, c1, Q2, c2, G) -> complex:
    e1 = np.sum(Q1 * G) + c1
    e2 = np.sum(Q2 * G) + c2
    conn = np.trace(Q1.T @ G @ Q2.T @ G.T) - np.trace(Q1.T @ G @ Q2 @ G.T)
    return e1 * e2 + conn


def _expand_quadratic(op: QuadraticOperator, rtol: float = 1e-14):
    """Terms ``(weight, [u, v])`` with ``op = sum weight (u.alpha)(v.alpha)`` plus a constant term."""
    Q, c = _quadratic_form(op)
    U, s, Vh = np.linalg.svd(Q)
    keep = s > rtol * max(s.max(initial=0.0), 1.0)
    terms = [(s[i], [U[:, i], Vh[i]]) for i in np.flatnonzero(keep)]
    if c != 0:
        terms.append((c, []))
    return terms


def expectation(state: GaussianState, items) -> complex:
    """Expectation of an ordered product of fields and quadratic operators.

    ``items`` is a single operator or a list; products are evaluated by
    Wick's theorem through a pfaffian of the pairwise contractions.
    Products with an odd number of fields give exactly zero.
    """
    if isinstance(items, (FermionField, QuadraticOperator)):
        items = [items]
    items = list(items)
    G = pairing_matrix(state)
    n_fields = sum(isinstance(x, FermionField) for x in items)
    if n_fields % 2:
        return 0.0
    quads = [x for x in items if isinstance(x, QuadraticOperator)]
    if not quads:
        return _wick([x.coef for x in items], G)
    if n_fields == 0 and len(quads) == 1:
        return state.expect(quads[0])
    if n_fields == 0 and len(quads) == 2:
        return _two_quadratic(*_quadratic_form(quads[0]), *_quadratic_form(quads[1]), G)
    expansions = [[(1.0, [x.coef])] if isinstance(x, FermionField) else _expand_quadratic(x) for x in items]
    total = 0j
    for choice in itertools.product(*expansions):
        w = np.prod([t[0] for t in choice])
        if w == 0:
            continue
        total += w * _wick([v for t in choice for v in t[1]], G)
    return total


# ---------------------------------------------------------------------------
# dynamics


def _check_generator(gen: QuadraticOperator) -> None:
    if not gen.is_hermitian(1e-9):
        raise NonHermitianGenerator("evolution generator must be Hermitian; use a hermitian combination")


def propagator(gen: QuadraticOperator, t: float) -> np.ndarray:
    """One-particle propagator ``exp(-i t M)`` with ``alpha(t) = exp(-i t M) alpha``."""
    _check_generator(gen)
    M = gen.bdg()
    w, W = np.linalg.eigh(0.5 * (M + M.conj().T))
    return (W * np.exp(-1j * t * w)) @ W.conj().T


def evolve(op, gen: QuadraticOperator, t: float):
    """Heisenberg evolution ``exp(i t G) op exp(-i t G)``.

    Accepts a :class:`QuadraticOperator` or a :class:`FermionField`.
    """
    U = propagator(gen, t)
    if isinstance(op, FermionField):
        return FermionField(U.T @ op.coef)
    N = U.conj().T @ op.bdg() @ U
    return QuadraticOperator.from_bdg(N, op.constant, op.N)


def evolve_state(state: GaussianState, gen: QuadraticOperator, t: float) -> GaussianState:
    """Schrodinger evolution ``exp(-i t G) rho exp(i t G)`` on the covariance."""
    U = propagator(gen, t)
    return GaussianState(U.conj() @ state.covariance @ U.T, state.N, state.parity)


def conformal_correlator(
    state: GaussianState,
    left,
    right,
    generator: QuadraticOperator,
    t: float,
    tail=(),
) -> complex:
    """``<left  exp(itG) right exp(-itG)  tail>`` in ``state``.

    ``left``, ``right`` and ``tail`` are operators or lists of operators
    (fields or quadratic operators).
    """

    def as_list(x):
        return list(x) if isinstance(x, (list, tuple)) else [x]

    moved = [evolve(x, generator, t) for x in as_list(right)]
    return expectation(state, as_list(left) + moved + as_list(tail))


def correlator_scan(func, grid, threads: int = 1) -> list:
    """Evaluate ``func(*point)`` over ``grid`` keeping the input order."""
    grid = list(grid)
    if threads <= 1:
        return [func(*p) for p in grid]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(lambda p: func(*p), grid))


def random_gaussian_state(m: int, rng: np.random.Generator, mixed: bool = False) -> GaussianState:
    """Random pure (or mixed) Gaussian state for property tests."""
    X = rng.normal(size=(2 * m, 2 * m)) + 1j * rng.normal(size=(2 * m, 2 * m))
    M = QuadraticOperator.from_bdg(_bdg_symmetrize(X)).bdg()
    w, W = np.linalg.eigh(M)
    if mixed:
        occ = 1.0 / (1.0 + np.exp(w))
    else:
        occ = (w < 0).astype(float)
    C = (W * occ) @ W.conj().T
    return GaussianState(C.conj(), None, 1)


def _bdg_symmetrize(X: np.ndarray) -> np.ndarray:
    """Project a matrix onto Hermitian BdG form."""
    m = X.shape[0] // 2
    A = 0.5 * (X[:m, :m] + X[:m, :m].conj().T)
    B = 0.5 * (X[:m, m:] - X[:m, m:].T)
    return np.block([[A, B], [B.conj().T, -A.T]])


def random_quadratic(m: int, rng: np.random.Generator, hermitian: bool = True) -> QuadraticOperator:
    X = rng.normal(size=(2 * m, 2 * m)) + 1j * rng.normal(size=(2 * m, 2 * m))
    if hermitian:
        return QuadraticOperator.from_bdg(_bdg_symmetrize(X), rng.normal())
    A = X[:m, :m]
    B = 0.5 * (X[:m, m:] - X[:m, m:].T)
    C = 0.5 * (X[m:, :m] - X[m:, :m].T)
    return QuadraticOperator(A, B, C, rng.normal() + 1j * rng.normal())


def expm_hermitian(H: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i t H)`` for a Hermitian matrix (dense oracle helper)."""
    return sla.expm(-1j * t * H)
