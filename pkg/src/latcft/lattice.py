"""Lattice geometry, the staggered free-fermion Hamiltonian and its exact solution.

All operators are stored on the single-component chain with ``m = 2n`` modes
(``n = 2**(N+1)`` two-component sites).  Mode ``j`` sits at
``x_j = -L + j*eps/2``; even modes carry the first field component and odd
modes the adjoint of the second one, so a two-component site ``x`` owns the
modes ``2i`` and ``2i + 1``.

Quadratic operators are written as

    O = sum A_pq a+_p a_q + 1/2 sum B_pq a+_p a+_q + 1/2 sum C_pq a_p a_q + offset

and internally converted to the canonical Bogoliubov-de Gennes matrix
``M = [[A, B], [C, -A^T]]`` acting on ``alpha = (a, a+)``, for which
``O = 1/2 alpha+ M alpha + 1/2 tr A + offset``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DegenerateGroundState, LatticeTooLarge

#: Largest scale accepted by :func:`build_spec`; raise it for bigger runs.
MAX_SCALE = 12

_SECTOR_ALIASES = {
    "ns": "NS",
    "neveu-schwarz": "NS",
    "neveuschwarz": "NS",
    "antiperiodic": "NS",
    "r": "R",
    "ramond": "R",
    "periodic": "R",
}


def _sector(name: str) -> str:
    try:
        return _SECTOR_ALIASES[str(name).strip().lower()]
    except KeyError:
        raise ConfigError(f"unknown sector {name!r}; use NS or R") from None


@dataclass(frozen=True)
class LatticeSpec:
    """Scale, circumference ``2L``, mass coupling and sector of a lattice."""

    N: int
    L: float = 1.0
    lam: float = 0.0
    sector: str = "NS"

    @property
    def L_N(self) -> int:
        return 2**self.N

    @property
    def eps(self) -> float:
        """Two-component lattice spacing."""
        return self.L / self.L_N

    @property
    def fine_eps(self) -> float:
        """Spacing of the single-component chain."""
        return 0.5 * self.eps

    @property
    def n_sites(self) -> int:
        return 2 ** (self.N + 1)

    @property
    def n_modes(self) -> int:
        return 2 * self.n_sites

    @property
    def eta(self) -> int:
        """Sign picked up by the field when going once around the circle."""
        return -1 if self.sector == "NS" else 1

    @property
    def coupling(self) -> float:
        """Overall energy scale ``L / (pi eps)`` of the Hamiltonian."""
        return self.L / (np.pi * self.eps)

    @property
    def site_grid(self) -> np.ndarray:
        return self.eps * np.arange(-self.L_N, self.L_N)

    @property
    def mode_positions(self) -> np.ndarray:
        return -self.L + self.fine_eps * np.arange(self.n_modes)

    @property
    def momentum_grid(self) -> np.ndarray:
        """Single-component momenta, ascending, in the window (-pi/eps', pi/eps']."""
        n = self.n_sites
        if self.sector == "NS":
            q = np.arange(-n, n) + 0.5
        else:
            q = np.arange(-n + 1, n + 1).astype(float)
        return (np.pi / self.L) * q

    def momentum_index(self, k) -> np.ndarray:
        """Grid index of momenta ``k`` after folding into the window."""
        n = self.n_sites
        q = np.rint(np.asarray(k, dtype=float) * self.L / np.pi - (0.5 if self.sector == "NS" else 0.0))
        q = q.astype(np.int64)
        # fold into the integer window
        if self.sector == "NS":
            return np.mod(q + n, 2 * n)
        return np.mod(q + n - 1, 2 * n)

    def negated_index(self) -> np.ndarray:
        """Index of ``-k`` for every grid index."""
        return self.momentum_index(-self.momentum_grid)

    def to_config(self) -> str:
        return f"N={self.N}\nL={self.L!r}\nlambda={self.lam!r}\nsector={self.sector}\n"


def build_spec(N: int, L: float = 1.0, lam: float = 0.0, sector: str = "NS", max_scale: int | None = None) -> LatticeSpec:
    """Validate parameters and return a :class:`LatticeSpec`.

    Raises
    ------
    LatticeTooLarge
        If ``N`` exceeds the memory cap (``MAX_SCALE`` unless overridden).
    """
    cap = MAX_SCALE if max_scale is None else max_scale
    if int(N) != N or N < 0:
        raise ConfigError(f"N must be a nonnegative integer, got {N!r}")
    if not L > 0:
        raise ConfigError(f"L must be positive, got {L!r}")
    if N > cap:
        raise LatticeTooLarge(f"N={N} exceeds the configured cap {cap} (matrix dimension 2^{N + 2})")
    return LatticeSpec(int(N), float(L), float(lam), _sector(sector))


def parse_config(text: str) -> dict[str, str]:
    """Parse flat ``key=value`` text; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = value
    return out


def spec_from_config(text: str) -> LatticeSpec:
    cfg = parse_config(text)
    try:
        return build_spec(
            int(cfg.get("N", "3")),
            float(cfg.get("L", "1")),
            float(cfg.get("lambda", "0")),
            cfg.get("sector", "NS"),
        )
    except ValueError as exc:
        raise ConfigError(f"bad lattice config value: {exc}") from None


# ---------------------------------------------------------------------------
# quadratic operators


def _antisym_error(X: np.ndarray) -> float:
    return float(np.max(np.abs(X + X.T), initial=0.0))


@dataclass(frozen=True, eq=False)
class QuadraticOperator:
    """Fermion bilinear with hopping block ``A`` and pairing blocks ``B``, ``C``.

    ``B`` multiplies pairs of creation operators and ``C`` pairs of
    annihilation operators.  Omitting ``C`` means ``C = B^H``, which together
    with Hermitian ``A`` and real ``offset`` gives a Hermitian operator.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray | None = None
    offset: complex = 0.0
    N: int | None = None

    def __post_init__(self):
        A = np.asarray(self.A, dtype=complex)
        B = np.asarray(self.B, dtype=complex)
        C = B.conj().T.copy() if self.C is None else np.asarray(self.C, dtype=complex)
        m = A.shape[0]
        if A.shape != (m, m) or B.shape != (m, m) or C.shape != (m, m):
            raise ValueError("blocks must be square and of equal size")
        scale = max(1.0, float(np.max(np.abs(B), initial=0.0)), float(np.max(np.abs(C), initial=0.0)))
        if _antisym_error(B) > 1e-10 * scale or _antisym_error(C) > 1e-10 * scale:
            raise ValueError("pairing blocks must be antisymmetric")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "offset", complex(self.offset))

    @property
    def n_modes(self) -> int:
        return self.A.shape[0]

    def bdg(self) -> np.ndarray:
        return np.block([[self.A, self.B], [self.C, -self.A.T]])

    @property
    def constant(self) -> complex:
        """Scalar ``c`` in ``O = 1/2 alpha+ M alpha + c``."""
        return self.offset + 0.5 * np.trace(self.A)

    @classmethod
    def from_bdg(cls, M: np.ndarray, constant: complex = 0.0, N: int | None = None) -> "QuadraticOperator":
        """Build from a canonical matrix; ``constant`` as in :attr:`constant`."""
        m = M.shape[0] // 2
        A = M[:m, :m]
        return cls(A, M[:m, m:], M[m:, :m], constant - 0.5 * np.trace(A), N)

    def adjoint(self) -> "QuadraticOperator":
        return QuadraticOperator(self.A.conj().T, self.C.conj().T, self.B.conj().T, np.conj(self.offset), self.N)

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.bdg()))))
        return (
            np.max(np.abs(self.A - self.A.conj().T)) <= tol * scale
            and np.max(np.abs(self.C - self.B.conj().T)) <= tol * scale
            and abs(self.offset.imag) <= tol * scale
        )

    def __add__(self, other: "QuadraticOperator") -> "QuadraticOperator":
        if not isinstance(other, QuadraticOperator):
            return NotImplemented
        return QuadraticOperator(self.A + other.A, self.B + other.B, self.C + other.C, self.offset + other.offset, self.N)

    def __sub__(self, other: "QuadraticOperator") -> "QuadraticOperator":
        return self + (-1.0) * other

    def __mul__(self, z) -> "QuadraticOperator":
        z = complex(z)
        return QuadraticOperator(z * self.A, z * self.B, z * self.C, z * self.offset, self.N)

    __rmul__ = __mul__

    def __neg__(self) -> "QuadraticOperator":
        return (-1.0) * self

    def shifted(self, c: complex) -> "QuadraticOperator":
        return QuadraticOperator(self.A, self.B, self.C, self.offset + c, self.N)

    def transformed(self, V: np.ndarray) -> "QuadraticOperator":
        """Image under the mode map ``a_p -> sum_q V_qp a_q`` (``V`` may be rectangular)."""
        A = V.conj() @ self.A @ V.T
        B = V.conj() @ self.B @ V.conj().T
        C = V @ self.C @ V.T
        return QuadraticOperator(A, B, C, self.offset, None)


def commutator(X: QuadraticOperator, Y: QuadraticOperator) -> QuadraticOperator:
    """Exact commutator; canonical matrices commute without a c-number."""
    MX, MY = X.bdg(), Y.bdg()
    return QuadraticOperator.from_bdg(MX @ MY - MY @ MX, 0.0, X.N)


def zero_operator(m: int, N: int | None = None) -> QuadraticOperator:
    Z = np.zeros((m, m), dtype=complex)
    return QuadraticOperator(Z, Z, Z, 0.0, N)


def number_operator(m: int) -> QuadraticOperator:
    return QuadraticOperator(np.eye(m), np.zeros((m, m)))


# ---------------------------------------------------------------------------
# the staggered Hamiltonian


def bond_signs(m: int, eta: int) -> np.ndarray:
    """Sign of the bond ``(j, j+1)``; the seam bond ``(m-1, 0)`` carries ``eta``."""
    s = np.ones(m)
    s[-1] = eta
    return s


def pairing_from_bonds(coef: np.ndarray, eta: int) -> QuadraticOperator:
    """Operator ``sum_b coef_b s_b (a+_b a+_{b+1} + a_{b+1} a_b)``.

    ``coef`` may be complex, in which case the result is not Hermitian.
    """
    m = len(coef)
    w = np.asarray(coef, dtype=complex) * bond_signs(m, eta)
    b = np.arange(m)
    b1 = (b + 1) % m
    B = np.zeros((m, m), dtype=complex)
    C = np.zeros((m, m), dtype=complex)
    B[b, b1] += w
    B[b1, b] -= w
    C[b1, b] += w
    C[b, b1] -= w
    return QuadraticOperator(np.zeros((m, m), dtype=complex), B, C, 0.0)


def staggered_chain(n_sites: int, L: float = 1.0, lam: float = 0.0, sector: str = "NS") -> QuadraticOperator:
    """Staggered Hamiltonian for any number of two-component sites.

    The spacing is ``eps = 2L / n_sites`` and the prefactor ``L / (pi eps)``.
    Dyadic site counts reproduce :func:`build_staggered_hamiltonian`; other
    counts are only used for small exact comparisons.
    """
    eta = -1 if _sector(sector) == "NS" else 1
    eps = 2.0 * L / n_sites
    J = L / (np.pi * eps)
    m = 2 * n_sites
    H = pairing_from_bonds(-J * np.ones(m), eta)
    A = J * lam * np.eye(m, dtype=complex)
    return QuadraticOperator(A, H.B, H.C, -J * lam * n_sites)


def build_staggered_hamiltonian(spec: LatticeSpec) -> QuadraticOperator:
    """Return the staggered Hamiltonian on the single-component chain."""
    H = staggered_chain(spec.n_sites, spec.L, spec.lam, spec.sector)
    return QuadraticOperator(H.A, H.B, H.C, H.offset, spec.N)


def two_component_view(spec: LatticeSpec, op: QuadraticOperator) -> dict[str, np.ndarray]:
    """Split an operator into blocks of the two field components.

    Returns the hopping blocks ``psi1+ psi1``, ``psi2+ psi2`` and the
    mixed block ``psi1+ psi2`` (coefficients of ``psi^(1)+_x psi^(2)_y``).
    """
    ev = np.arange(0, spec.n_modes, 2)
    od = ev + 1
    return {
        "11": op.A[np.ix_(ev, ev)],
        # psi2+_x psi2_y = a_odd(x) a+_odd(y) -> -A^T on the odd block, up to a constant
        "22": -op.A[np.ix_(od, od)].T,
        "12": op.B[np.ix_(ev, od)],
    }


# ---------------------------------------------------------------------------
# momentum space and Bogoliubov modes


def fourier_matrix(spec: LatticeSpec) -> np.ndarray:
    """Unitary ``F`` with normalized modes ``a~_l = sum_j F_lj a_j``."""
    ls = spec.momentum_grid
    return np.exp(-1j * np.outer(ls, spec.mode_positions)) / np.sqrt(spec.n_modes)


def nambu_fourier(spec: LatticeSpec) -> np.ndarray:
    F = fourier_matrix(spec)
    Z = np.zeros_like(F)
    return np.block([[F, Z], [Z, F.conj()]])


def to_momentum_basis(spec: LatticeSpec, M: np.ndarray) -> np.ndarray:
    U = nambu_fourier(spec)
    return U @ M @ U.conj().T


@dataclass(frozen=True)
class SpectralData:
    """Dispersion and Bogoliubov data of the staggered Hamiltonian.

    ``u`` and ``v`` define the quasi-particles
    ``b_l = u_l a~_l + v_l a~+_{-l}`` in normalized momentum modes.
    """

    momenta: np.ndarray
    omega: np.ndarray
    theta: np.ndarray
    offset: float
    u: np.ndarray
    v: np.ndarray
    zero_modes: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    @property
    def has_zero_mode(self) -> bool:
        return self.zero_modes.size > 0


def pairing_amplitude(spec: LatticeSpec) -> np.ndarray:
    """Momentum-space pairing ``B[l, -l]`` of the Hamiltonian."""
    return -2j * spec.coupling * np.sin(spec.momentum_grid * spec.fine_eps)


def diagonalize(spec: LatticeSpec, zero_tol: float = 1e-12) -> SpectralData:
    """Closed-form Fourier plus Bogoliubov diagonalization.

    Zero modes (Ramond, massless) are flagged, not rejected.
    """
    a = spec.coupling * spec.lam
    b = pairing_amplitude(spec)
    scale = max(1.0, spec.coupling)
    b = np.where(np.abs(b) <= 1e-13 * scale, 0.0, b)
    E = np.sqrt(a * a + np.abs(b) ** 2)
    ls = spec.momentum_grid
    zero = np.flatnonzero(E <= zero_tol * scale)
    Es = np.where(E > 0, E, 1.0)
    u = np.sqrt(np.clip((Es + a) / (2 * Es), 0.0, 1.0)).astype(complex)
    v = np.exp(1j * np.angle(b)) * np.sqrt(np.clip((Es - a) / (2 * Es), 0.0, 1.0))
    u[zero], v[zero] = 1.0, 0.0
    theta = 0.5 * np.arctan2(np.abs(b), a)
    # the BdG constant -J lam n + J lam m / 2 of the chain vanishes since m = 2n
    offset = -0.5 * float(np.sum(E))
    return SpectralData(ls, E, theta, offset, u, v, zero)


def bogoliubov_matrix(spec: LatticeSpec, sd: SpectralData | None = None) -> np.ndarray:
    """Unitary ``T`` with quasi-particles ``(b, b+) = T (a~, a~+)``."""
    sd = diagonalize(spec) if sd is None else sd
    m = spec.n_modes
    neg = spec.negated_index()
    i = np.arange(m)
    T = np.zeros((2 * m, 2 * m), dtype=complex)
    T[i, i] = sd.u
    T[i, m + neg] += sd.v
    T[m + i, m + i] = sd.u.conj()
    T[m + i, neg] += sd.v.conj()
    return T


def quasiparticle_transform(spec: LatticeSpec, sd: SpectralData | None = None) -> np.ndarray:
    """Map from site modes ``(a, a+)`` to quasi-particles ``(b, b+)``."""
    return bogoliubov_matrix(spec, sd) @ nambu_fourier(spec)


# ---------------------------------------------------------------------------
# Gaussian states


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Fermionic Gaussian state stored by ``Gamma_ij = <alpha_i+ alpha_j>``."""

    covariance: np.ndarray
    N: int | None = None
    parity: int = 1

    @property
    def n_modes(self) -> int:
        return self.covariance.shape[0] // 2

    def occupations(self) -> np.ndarray:
        return np.linalg.eigvalsh(0.5 * (self.covariance + self.covariance.conj().T))

    def is_pure(self, tol: float = 1e-10) -> bool:
        G = self.covariance
        return float(np.max(np.abs(G @ G - G))) <= tol

    def check(self, tol: float = 1e-10) -> None:
        G = self.covariance
        m = self.n_modes
        if np.max(np.abs(G - G.conj().T)) > tol:
            raise ValueError("covariance is not Hermitian")
        # particle-hole structure: <a_p a+_q> = delta - <a+_q a_p>
        ph = G[m:, m:] - (np.eye(m) - G[:m, :m].T)
        if np.max(np.abs(ph)) > tol:
            raise ValueError("covariance violates the particle-hole relation")
        occ = self.occupations()
        if occ.min() < -tol or occ.max() > 1 + tol:
            raise ValueError("occupations outside [0, 1]")

    def expect(self, op: QuadraticOperator) -> complex:
        """Expectation value of a quadratic operator."""
        return 0.5 * np.sum(op.bdg() * self.covariance) + op.constant


def vacuum_covariance(T: np.ndarray) -> np.ndarray:
    """Covariance of the state annihilated by the first half of ``beta = T alpha``."""
    m = T.shape[0] // 2
    Cb = np.zeros(2 * m)
    Cb[m:] = 1.0
    return (T.T * Cb) @ T.conj()


def maximally_mixed(m: int, N: int | None = None) -> GaussianState:
    return GaussianState(0.5 * np.eye(2 * m, dtype=complex), N, 1)


def fock_vacuum_state(m: int, filled=(), N: int | None = None) -> GaussianState:
    """Product state with the listed modes occupied."""
    occ = np.zeros(m)
    occ[list(filled)] = 1.0
    G = np.diag(np.concatenate([occ, 1.0 - occ])).astype(complex)
    return GaussianState(G, N, int((-1) ** int(occ.sum())))


def defining_vacuum(spec: LatticeSpec) -> GaussianState:
    """Fock vacuum of both field components (first empty, second empty).

    In chain modes this fills every odd mode.
    """
    return fock_vacuum_state(spec.n_modes, range(1, spec.n_modes, 2), spec.N)


def state_parity(state: GaussianState) -> float:
    """Expectation value of the fermion parity ``(-1)^F``."""
    from .gaussian import pfaffian

    m = state.n_modes
    G = majorana_two_point(state.covariance)
    order = np.arange(2 * m).reshape(2, m).T.ravel()  # x1, y1, x2, y2, ...
    K = G[np.ix_(order, order)]
    K = np.triu(K, 1)
    K = K - K.T
    return float(np.real((-1j) ** m * pfaffian(K)))


def majorana_two_point(C: np.ndarray) -> np.ndarray:
    """``<gamma_a gamma_b>`` for ``gamma = (a + a+, -i(a - a+))``."""
    m = C.shape[0] // 2
    I = np.eye(m)
    Om = np.block([[I, I], [-1j * I, 1j * I]])
    P = np.block([[np.zeros((m, m)), I], [I, np.zeros((m, m))]])
    return Om @ (P @ C) @ Om.T


def ground_state(spec: LatticeSpec, parity: int | None = None) -> GaussianState:
    """Bogoliubov vacuum of the staggered Hamiltonian.

    Parameters
    ----------
    parity:
        Required when zero modes exist (Ramond, massless): the zero mode at
        ``k = 0`` is filled or left empty to give this total parity.

    Raises
    ------
    DegenerateGroundState
        Zero mode present and no parity requested.
    """
    sd = diagonalize(spec)
    T = quasiparticle_transform(spec, sd)
    G = vacuum_covariance(T)
    # pairs (l, -l) contribute even parity; a self-paired mode is filled iff v != 0
    selfpaired = np.flatnonzero(spec.negated_index() == np.arange(spec.n_modes))
    p = int((-1) ** int(np.sum(np.abs(sd.v[selfpaired]) > 0.5)))
    if sd.has_zero_mode:
        if parity is None:
            raise DegenerateGroundState(
                f"{len(sd.zero_modes)} zero mode(s) at k = {sd.momenta[sd.zero_modes] * spec.L / np.pi} (pi/L); pass parity=+1 or -1"
            )
        if parity not in (1, -1):
            raise ValueError("parity must be +1 or -1")
        if p != parity:
            # swap b_0 and b_0+ for the zero mode closest to k = 0
            i = int(sd.zero_modes[np.argmin(np.abs(sd.momenta[sd.zero_modes]))])
            m = spec.n_modes
            perm = np.arange(2 * m)
            perm[i], perm[m + i] = m + i, i
            G = vacuum_covariance(T[perm])
            p = parity
    return GaussianState(G, spec.N, p)


# ---------------------------------------------------------------------------
# export


def covariance_csv(spec: LatticeSpec, state: GaussianState, basis: str = "momentum") -> str:
    """CSV of the covariance with a header naming the mode momenta (units pi/L).

    Rows and columns are ``a~_l`` followed by ``a~+_l``; entries are written
    as ``re+imj`` complex literals.
    """
    G = state.covariance
    labels = [f"{q:g}" for q in spec.momentum_grid * spec.L / np.pi]
    if basis == "momentum":
        U = nambu_fourier(spec)
        G = U.conj() @ G @ U.T
        head = [f"a({s})" for s in labels] + [f"a+({s})" for s in labels]
    else:
        head = [f"a[{j}]" for j in range(spec.n_modes)] + [f"a+[{j}]" for j in range(spec.n_modes)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["row"] + head)
    for name, row in zip(head, G):
        w.writerow([name] + [f"{z.real:.15g}{z.imag:+.15g}j" for z in row])
    return buf.getvalue()


def read_covariance_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    head = rows[0][1:]
    data = np.array([[complex(s) for s in r[1:]] for r in rows[1:]])
    return head, data
