"""Lattice Virasoro generators and the emergent central charge.

Generators are built in two independent ways: from Fourier modes of the
Hamiltonian density and their commutator with the Hamiltonian, and from an
explicit kernel acting on momentum modes.  Momenta ``k`` are given in
physical units; ``kappa = k L / pi`` is the integer mode label.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import MassiveDensityUnsupported, NyquistViolation, UndefinedForUnitK
from .lattice import (
    LatticeSpec,
    QuadraticOperator,
    bogoliubov_matrix,
    build_staggered_hamiltonian,
    commutator,
    diagonalize,
    fourier_matrix,
    nambu_fourier,
    pairing_from_bonds,
)

CENTRAL_CHARGES = {"c0": 0.0, "c12": 0.5, "c1": 1.0}


def _check_massless(spec: LatticeSpec) -> None:
    if spec.lam != 0:
        raise MassiveDensityUnsupported("the symmetric density is defined for the massless model only")


def _check_nyquist(spec: LatticeSpec, k: float) -> None:
    if abs(k) >= np.pi / spec.eps - 1e-12:
        raise NyquistViolation(f"|k| = {abs(k):.6g} reaches the lattice bound pi/eps = {np.pi / spec.eps:.6g}")


def mode_label(spec: LatticeSpec, k: float) -> int:
    kappa = k * spec.L / np.pi
    if abs(kappa - round(kappa)) > 1e-9:
        raise ValueError(f"k must be a multiple of pi/L, got kL/pi = {kappa}")
    return int(round(kappa))


def hamiltonian_density_modes(spec: LatticeSpec, k: float) -> QuadraticOperator:
    """Fourier mode ``eps (L/pi) sum_x exp(ikx) h_x`` of the symmetric density.

    Each site density spreads over its three nearest bonds with weights
    1, 2, 1, so that ``k = 0`` reproduces the Hamiltonian exactly.
    """
    _check_massless(spec)
    mode_label(spec, k)
    return _density_operator(spec, np.exp(1j * k * spec.site_grid))


def _density_operator(spec: LatticeSpec, ph: np.ndarray) -> QuadraticOperator:
    coef = np.empty(spec.n_modes, dtype=complex)
    coef[0::2] = 2 * ph
    coef[1::2] = ph + np.roll(ph, -1)
    coef *= -spec.L / (2 * np.pi * spec.eps)
    op = pairing_from_bonds(coef, spec.eta)
    return QuadraticOperator(op.A, op.B, op.C, 0.0, spec.N)


def lattice_momentum_operator(spec: LatticeSpec) -> QuadraticOperator:
    """``sum_l -J sin(eps l) a+_l a_l``, the generator of lattice translations by ``eps``."""
    F = fourier_matrix(spec)
    w = -spec.coupling * np.sin(spec.eps * spec.momentum_grid)
    A = F.conj().T @ (w[:, None] * F)
    Z = np.zeros_like(A)
    # particle-hole symmetric form: zero BdG constant
    return QuadraticOperator(A, Z, Z, -0.5 * np.trace(A), spec.N)


def koo_saleur_limit(spec: LatticeSpec, chirality: str = "left") -> QuadraticOperator:
    """The ``k -> 0`` limit of the commutator form, a chiral ``L_0``.

    In momentum space ``f(k) [H_k, H_0]`` is smooth in ``k`` and tends to
    the lattice momentum operator, giving ``(H_0 +- P) / 2``.  ``koo_saleur``
    at ``k = 0`` instead drops the commutator and returns ``H_0 / 2``.
    """
    _check_massless(spec)
    sign = {"left": 1, "right": -1}[chirality]
    H0 = build_staggered_hamiltonian(spec)
    return 0.5 * (H0 + sign * lattice_momentum_operator(spec))


def koo_saleur_factor(spec: LatticeSpec, k: float) -> float:
    return np.pi * spec.eps / (2 * spec.L * np.sin(0.5 * spec.eps * k))


@dataclass(frozen=True, eq=False)
class KooSaleurGenerator:
    """Lattice Virasoro generator with its labels."""

    N: int
    k: float
    chirality: str
    c: float
    payload: QuadraticOperator
    phi: float = 0.0

    @property
    def kappa(self) -> int:
        return int(round(self.k / np.pi))


def _chiral(spec: LatticeSpec, k: float, H0: QuadraticOperator, sign: int) -> QuadraticOperator:
    if k == 0:
        return 0.5 * H0
    Hk = hamiltonian_density_modes(spec, sign * k)
    f = koo_saleur_factor(spec, k)
    return 0.5 * (Hk + f * commutator(Hk, H0))


def koo_saleur(
    spec: LatticeSpec,
    k: float,
    c: float = 0.0,
    chirality: str = "left",
    phi: float = 0.0,
) -> KooSaleurGenerator:
    """Koo-Saleur generator in the site basis.

    ``chirality`` is ``"left"`` (``L_k``), ``"right"`` (``Lbar_k``, built from
    the reflected density modes) or ``"hermitian"`` for
    ``exp(i phi) L_k + exp(-i phi) L_{-k}`` (``H_0`` plus ``c/12`` at ``k = 0``).
    The constant ``c/24`` is attached to each chiral ``k = 0`` generator.
    """
    _check_massless(spec)
    _check_nyquist(spec, k)
    mode_label(spec, k)
    H0 = build_staggered_hamiltonian(spec)
    shift = c / 24 if k == 0 else 0.0
    if chirality == "left":
        op = _chiral(spec, k, H0, 1).shifted(shift)
    elif chirality == "right":
        op = _chiral(spec, k, H0, -1).shifted(shift)
    elif chirality == "hermitian":
        z = np.exp(1j * phi)
        op = z * _chiral(spec, k, H0, 1) + np.conj(z) * _chiral(spec, -k, H0, 1)
        op = op.shifted(2 * np.cos(phi) * shift)
    else:
        raise ValueError(f"unknown chirality {chirality!r}")
    return KooSaleurGenerator(spec.N, k, chirality, c, QuadraticOperator(op.A, op.B, op.C, op.offset, spec.N), phi)


# ---------------------------------------------------------------------------
# explicit momentum kernel


@dataclass(frozen=True, eq=False)
class MomentumOperator:
    """Sparse bilinear on normalized momentum modes (same layout as QuadraticOperator)."""

    A: sp.csr_matrix
    B: sp.csr_matrix
    C: sp.csr_matrix
    offset: complex
    N: int

    def bdg(self) -> sp.csr_matrix:
        return sp.bmat([[self.A, self.B], [self.C, -self.A.T]], format="csr")

    @property
    def constant(self) -> complex:
        return self.offset + 0.5 * self.A.diagonal().sum()

    def to_position(self, spec: LatticeSpec) -> QuadraticOperator:
        U = nambu_fourier(spec)
        M = U.conj().T @ self.bdg().toarray() @ U
        return QuadraticOperator.from_bdg(M, self.constant, spec.N)

    def adjoint(self) -> "MomentumOperator":
        return MomentumOperator(self.A.conj().T.tocsr(), self.C.conj().T.tocsr(), self.B.conj().T.tocsr(), np.conj(self.offset), self.N)


def _kernel(eps: float, l, lp, k, variant: str):
    e = np.exp(0.25j * eps * k)
    s = np.sin
    l11 = -e * s(eps * (l + k / 2))
    l12 = -1j * (e * s(eps * l / 2) + s(eps * (l + k) / 2) / e)
    if variant == "printed":
        l21 = 1j * (e * s(eps * (lp - k) / 2) + s(eps * lp / 2) / e)
    elif variant == "corrected":
        l21 = 1j * (s(eps * (lp - k) / 2) / e + e * s(eps * lp / 2))
    else:
        raise ValueError(f"unknown kernel variant {variant!r}")
    l22 = -s(eps * (l + lp) / 2) / e
    return 0.5 * l11, 0.5 * l12, 0.5 * l21, 0.5 * l22


def koo_saleur_momentum_block(spec: LatticeSpec, k: float, variant: str = "corrected") -> MomentumOperator:
    """Generator assembled from the explicit two-by-two momentum kernel.

    Both umklapp partners ``l' = l + k`` and ``l' = l + k + 2 pi/eps`` are
    included; the sines are evaluated at the unreduced ``l'``.  The result
    acts on unit-normalized momentum modes.
    """
    _check_massless(spec)
    _check_nyquist(spec, k)
    mode_label(spec, k)
    m = spec.n_modes
    eps = spec.eps
    ls = spec.momentum_grid
    idx = spec.momentum_index
    i_l = np.arange(m)
    i_ml = idx(-ls)
    pref = m * np.exp(-0.25j * eps * k) / (8 * np.pi)
    rows = {"A": [], "G2": [], "G3": []}
    const = 0j
    for u in (0, 1):
        lp = ls + k + u * 2 * np.pi / eps
        c11, c12, c21, c22 = (pref * v for v in _kernel(eps, ls, lp, k, variant))
        i_lp = idx(lp)
        i_mlp = idx(-lp)
        rows["A"].append((i_lp, i_l, c11))
        rows["G2"].append((i_lp, i_ml, c12))
        rows["G3"].append((i_mlp, i_l, c21))
        # a_{-l'} a+_{-l} = delta - a+_{-l} a_{-l'}
        rows["A"].append((i_ml, i_mlp, -c22))
        const += np.sum(c22[i_mlp == i_ml])

    def assemble(parts):
        r = np.concatenate([p[0] for p in parts])
        c = np.concatenate([p[1] for p in parts])
        v = np.concatenate([p[2] for p in parts])
        return sp.coo_matrix((v, (r, c)), shape=(m, m)).tocsr()

    A = assemble(rows["A"])
    G2 = assemble(rows["G2"])
    G3 = assemble(rows["G3"])
    return MomentumOperator(A, (G2 - G2.T).tocsr(), (G3 - G3.T).tocsr(), const, spec.N)


def reflection_matrix(spec: LatticeSpec) -> np.ndarray:
    """Mode map of the spatial reflection ``a_j -> i s_j a_{1-j mod m}``.

    ``s_j`` is the sector sign for modes whose image wraps around the seam.
    The reflection fixes the density centres and exchanges left- and
    right-moving generators.
    """
    m = spec.n_modes
    j = np.arange(m)
    V = np.zeros((m, m), dtype=complex)
    V[(1 - j) % m, j] = 1j * np.where(j > 1, spec.eta, 1)
    return V


def reflect(spec: LatticeSpec, op: QuadraticOperator) -> QuadraticOperator:
    out = op.transformed(reflection_matrix(spec))
    return QuadraticOperator(out.A, out.B, out.C, out.offset, op.N)


def to_momentum(spec: LatticeSpec, op: QuadraticOperator) -> tuple[np.ndarray, complex]:
    """Canonical matrix of a site-basis operator in momentum modes, and its constant."""
    U = nambu_fourier(spec)
    return U @ op.bdg() @ U.conj().T, op.constant


# ---------------------------------------------------------------------------
# chiral projection and central charge


def chiral_modes(spec: LatticeSpec, c: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Momentum indices, mode labels and branch tags of a chiral sector.

    ``c = 1/2`` keeps the low-momentum half-branch ``-pi/(2 eps') < l < 0``;
    ``c = 1`` adds the doubler branch ``l > pi/(2 eps')``.  Labels are the
    distance from the branch point in units of ``pi/L``.
    """
    ls = spec.momentum_grid
    edge = np.pi / (2 * spec.fine_eps)
    low = np.flatnonzero((ls < 0) & (ls > -edge))
    labels = [np.abs(ls[low]) * spec.L / np.pi]
    branch = [np.zeros(len(low), dtype=int)]
    idx = [low]
    if c == 1.0:
        dbl = np.flatnonzero(ls > edge)
        idx.append(dbl)
        labels.append((np.pi / spec.fine_eps - ls[dbl]) * spec.L / np.pi)
        branch.append(np.ones(len(dbl), dtype=int))
    elif c != 0.5:
        raise ValueError("chiral projection is defined for c = 1/2 and c = 1")
    idx = np.concatenate(idx)
    labels = np.concatenate(labels)
    branch = np.concatenate(branch)
    order = np.lexsort((labels, branch))
    return idx[order], labels[order], branch[order]


def quasiparticle_block(spec: LatticeSpec, op: MomentumOperator | tuple, slots: np.ndarray | None = None) -> np.ndarray:
    """Canonical matrix in quasi-particle modes, optionally restricted to given mode indices.

    ``slots`` selects momentum indices; particle and hole components of each
    are kept, so the result has shape ``(2s, 2s)``.
    """
    T = sp.csr_matrix(bogoliubov_matrix(spec, diagonalize(spec)))
    M = op.bdg() if isinstance(op, MomentumOperator) else sp.csr_matrix(op[0])
    Q = T @ M @ T.conj().T
    if slots is None:
        return Q.toarray()
    m = spec.n_modes
    sel = np.concatenate([slots, m + np.asarray(slots)])
    return Q[sel][:, sel].toarray()


def _generator_for_charge(spec: LatticeSpec, kappa: int) -> MomentumOperator:
    return koo_saleur_momentum_block(spec, kappa * np.pi / spec.L)


def central_charge_estimate(spec: LatticeSpec, k: float, sector: str = "c12", method: str = "projected") -> float:
    """Central charge read off from the vacuum commutator ``[L_k, L_-k]``.

    ``sector`` is ``"c12"`` or ``"c1"`` (chiral projections of the ground
    state) or ``"c0"`` (the defining Fock vacuum).  With ``method="full"``
    the unprojected generators and ground state are used together with the
    ``L_0`` subtraction.
    """
    from .lattice import defining_vacuum, ground_state

    kappa = mode_label(spec, k)
    if abs(kappa) == 1:
        raise UndefinedForUnitK("the central term vanishes at |k| = pi/L; use |k| >= 2 pi/L")
    if kappa == 0:
        raise UndefinedForUnitK("k = 0 carries no central term")
    den = kappa**3 - kappa
    if sector == "c0" or method == "full":
        X = koo_saleur(spec, k).payload
        Y = koo_saleur(spec, -k).payload
        Z = koo_saleur(spec, 0.0).payload
        state = defining_vacuum(spec) if sector == "c0" else ground_state(spec)
        comm = commutator(X, Y)
        val = state.expect(comm) - 2 * kappa * state.expect(Z)
        return float(np.real(12 * val / den))
    c = CENTRAL_CHARGES[sector]
    slots, _, _ = chiral_modes(spec, c)
    X = quasiparticle_block(spec, _generator_for_charge(spec, kappa), slots)
    Y = quasiparticle_block(spec, _generator_for_charge(spec, -kappa), slots)
    s = len(slots)
    # projected vacuum: every hole slot filled, every particle slot empty;
    # L_0 is normal ordered in that vacuum so its expectation drops out
    val = 0.5 * np.trace((X @ Y - Y @ X)[s:, s:])
    return float(np.real(12 * val / den))
