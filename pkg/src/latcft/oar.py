"""Renormalization maps between lattice scales.

Two families of scaling maps send single-component modes at a coarse scale
to the next finer one: a real-space map built from an orthogonal wavelet
low-pass filter, and a momentum-space map keeping the long-wavelength
modes.  Both are isometries on one-particle space, so bilinears map to
bilinears and states are coarse-grained by the adjoint map.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import FilterTooWide, NonConvergence, ScaleOrderViolation, UnsupportedOrder
from .lattice import GaussianState, LatticeSpec, QuadraticOperator, _sector, build_spec

SUPPORTED_ORDERS = (2, 4, 6, 8, 10, 12)


@dataclass(frozen=True, eq=False)
class WaveletFilter:
    """Orthogonal low-pass filter ``c_0 .. c_{K-1}``."""

    K: int
    coefficients: np.ndarray

    def symbol(self, xi) -> np.ndarray:
        """``m0(xi) = 2^{-1/2} sum_l c_l exp(-i l xi)``, with ``m0(0) = 1``."""
        xi = np.asarray(xi, dtype=float)
        ls = np.arange(self.K)
        return np.exp(-1j * np.multiply.outer(xi, ls)) @ self.coefficients / np.sqrt(2)

    def invariant_errors(self) -> tuple[float, float]:
        """Deviation from ``sum c = sqrt 2`` and from orthonormality of even shifts."""
        c = self.coefficients
        s = abs(c.sum() - np.sqrt(2))
        corr = np.correlate(c, c, mode="full")[len(c) - 1 :: 2]
        target = np.zeros_like(corr)
        target[0] = 1.0
        return float(s), float(np.max(np.abs(corr - target)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["l", "c_l"])
        for i, v in enumerate(self.coefficients):
            w.writerow([i, repr(float(v))])
        return buf.getvalue()


def daubechies_filter(K: int) -> WaveletFilter:
    """Minimal-phase Daubechies filter with ``K`` taps (``K/2`` vanishing moments).

    Computed by spectral factorization of the Daubechies polynomial.

    Raises
    ------
    UnsupportedOrder
        If ``K`` is not one of ``SUPPORTED_ORDERS``.
    """
    if K not in SUPPORTED_ORDERS:
        raise UnsupportedOrder(f"filter order {K} not supported; choose from {SUPPORTED_ORDERS}")
    p = K // 2
    # z^(p-1) P(y) with y = sin^2(xi/2) = -(z - 1)^2 / (4z), as a polynomial in z
    P = np.polynomial.Polynomial
    poly = P([0.0])
    for j in range(p):
        poly += comb(p - 1 + j, j) * (-0.25) ** j * P([-1.0, 1.0]) ** (2 * j) * P.basis(p - 1 - j)
    poly = poly.coef[::-1]
    roots = np.roots(poly) if p > 1 else np.zeros(0)
    inner = roots[np.abs(roots) < 1]
    q = np.real(np.poly(inner)) if inner.size else np.ones(1)
    h = q
    for _ in range(p):
        h = np.convolve(h, [1.0, 1.0])
    h = h * np.sqrt(2) / h.sum()
    # order so that the largest weight sits at the front (matches the usual D4 table)
    if abs(h[0]) < abs(h[-1]):
        h = h[::-1]
    return WaveletFilter(K, np.real(h))


def iterated_filter(filt: WaveletFilter, levels: int) -> np.ndarray:
    """Filter of ``levels`` consecutive refinements, ``c2[2l + l'] = sum c_l c_l'`` for two."""
    out = np.ones(1)
    for _ in range(levels):
        up = np.zeros(2 * len(out) - 1)
        up[::2] = out
        out = np.convolve(up, filt.coefficients)
    return out


# ---------------------------------------------------------------------------
# real-space scaling map


def _sign_periodize(idx: np.ndarray, period: int, eta: int) -> tuple[np.ndarray, np.ndarray]:
    wraps = np.floor_divide(idx, period)
    return np.mod(idx, period), np.where(wraps % 2 == 0, 1.0, float(eta))


def wavelet_isometry(filt: WaveletFilter, N: int, sector: str = "NS", direction: int = 1) -> np.ndarray:
    """One-particle isometry from scale ``N`` to ``N + 1`` on single-component modes.

    Site ``i`` at scale ``N`` maps to ``sum_l c_l`` (site ``2i + direction*l``
    at scale ``N + 1``); both field components use the same real weights.
    Indices are periodized around the circle, with the sector sign for each
    pass across the seam.

    Raises
    ------
    FilterTooWide
        If the filter support exceeds the number of sites at scale ``N``.
    """
    eta = -1 if _sector(sector) == "NS" else 1
    n_c = 2 ** (N + 1)
    if filt.K > n_c:
        raise FilterTooWide(f"{filt.K}-tap filter does not fit on {n_c} sites at scale {N}")
    n_f = 2 * n_c
    V = np.zeros((2 * n_f, 2 * n_c))
    for i in range(n_c):
        tgt, sgn = _sign_periodize(2 * i + direction * np.arange(filt.K), n_f, eta)
        for comp in (0, 1):
            np.add.at(V[:, 2 * i + comp], 2 * tgt + comp, sgn * filt.coefficients)
    return V


def multiscale_wavelet_isometry(filt: WaveletFilter, N1: int, N2: int, sector: str = "NS") -> np.ndarray:
    """Composite isometry from ``N1`` to ``N2``."""
    if N1 > N2:
        raise ScaleOrderViolation(f"cannot refine from scale {N1} down to {N2}")
    V = np.eye(2 ** (N1 + 2))
    for N in range(N1, N2):
        V = wavelet_isometry(filt, N, sector) @ V
    return V


def direct_wavelet_isometry(filt: WaveletFilter, N1: int, N2: int, sector: str = "NS") -> np.ndarray:
    """Isometry from ``N1`` to ``N2`` built in one step from the iterated filter."""
    if N1 > N2:
        raise ScaleOrderViolation(f"cannot refine from scale {N1} down to {N2}")
    eta = -1 if _sector(sector) == "NS" else 1
    c = iterated_filter(filt, N2 - N1)
    step = 2 ** (N2 - N1)
    n_c, n_f = 2 ** (N1 + 1), 2 ** (N2 + 1)
    V = np.zeros((2 * n_f, 2 * n_c))
    for i in range(n_c):
        tgt, sgn = _sign_periodize(step * i + np.arange(len(c)), n_f, eta)
        for comp in (0, 1):
            np.add.at(V[:, 2 * i + comp], 2 * tgt + comp, sgn * c)
    return V


def wavelet_scaling_map(filt: WaveletFilter, op: QuadraticOperator, N: int, sector: str = "NS") -> QuadraticOperator:
    """Image of a scale-``N`` bilinear at scale ``N + 1``."""
    V = wavelet_isometry(filt, N, sector)
    out = op.transformed(V)
    return QuadraticOperator(out.A, out.B, out.C, out.offset, N + 1)


# ---------------------------------------------------------------------------
# momentum-space scaling map


def field_momenta(M: int, L: float = 1.0, sector: str = "NS") -> np.ndarray:
    """Two-component field momenta resolved at scale ``M``."""
    LM = 2**M
    if _sector(sector) == "NS":
        q = np.arange(-LM, LM) + 0.5
    else:
        q = np.arange(-LM + 1, LM + 1).astype(float)
    return np.pi / L * q


def momentum_isometry(M: int, N: int, L: float = 1.0, sector: str = "NS") -> np.ndarray:
    """One-particle isometry from scale ``M`` to ``N`` keeping momenta resolved at ``M``.

    Normalized field modes map identically; short-wavelength modes of scale
    ``N`` receive nothing.  Each component is Fourier transformed at its own
    staggered position; the second component is stored through its adjoint
    and so uses the complex-conjugate kernel.
    """
    if M > N:
        raise ScaleOrderViolation(f"coarse scale {M} exceeds fine scale {N}")
    ks = field_momenta(M, L, sector)
    sM, sN = build_spec(M, L), build_spec(N, L)
    n_M, n_N = sM.n_sites, sN.n_sites
    V = np.zeros((2 * n_N, 2 * n_M), dtype=complex)
    for comp in (0, 1):
        # each component sits at its own staggered position
        xM = sM.mode_positions[comp::2]
        xN = sN.mode_positions[comp::2]
        K = np.exp(1j * ks[None, :] * (xM[None, :, None] - xN[:, None, None])).sum(axis=2)
        K /= np.sqrt(n_M * n_N)
        V[comp::2, comp::2] = K if comp == 0 else K.conj()
    return V


def momentum_mode_amplitude(M: int, N: int, convention: str = "weighted") -> float:
    """Factor multiplying a Fourier field mode under the map from ``M`` to ``N``.

    ``"weighted"``: modes ``eps sum_x exp(-ikx) psi_x`` (factor ``2^{(N-M)/2}``);
    ``"unweighted"``: plain sums (``2^{(M-N)/2}``); ``"normalized"``: unit
    modes (factor 1).
    """
    if M > N:
        raise ScaleOrderViolation(f"coarse scale {M} exceeds fine scale {N}")
    return {"weighted": 2 ** ((N - M) / 2), "unweighted": 2 ** ((M - N) / 2), "normalized": 1.0}[convention]


def momentum_scaling_map(M: int, N: int, op: QuadraticOperator, L: float = 1.0, sector: str = "NS") -> QuadraticOperator:
    """Image of a scale-``M`` bilinear (site basis) at scale ``N``."""
    V = momentum_isometry(M, N, L, sector)
    out = op.transformed(V)
    return QuadraticOperator(out.A, out.B, out.C, out.offset, N)


def _nambu(V: np.ndarray) -> np.ndarray:
    Z = np.zeros_like(V)
    return np.block([[V, Z], [Z, V.conj()]])


def coarse_grain_state(
    state: GaussianState,
    N1: int,
    rg: str = "momentum",
    filt: WaveletFilter | None = None,
    L: float = 1.0,
    sector: str = "NS",
) -> GaussianState:
    """Dual of the scaling map: the state at scale ``N1`` seen through scale ``N2``."""
    N2 = state.N
    if N2 is None or N1 >= N2:
        raise ScaleOrderViolation(f"coarse scale {N1} must be below the state scale {N2}")
    if rg == "momentum":
        V = momentum_isometry(N1, N2, L, sector)
    elif rg == "wavelet":
        if filt is None:
            raise ValueError("wavelet coarse-graining needs a filter")
        V = multiscale_wavelet_isometry(filt, N1, N2, sector)
    else:
        raise ValueError(f"unknown rg flavour {rg!r}")
    W = _nambu(V)
    G = W.conj().T @ state.covariance @ W
    return GaussianState(G, N1, state.parity)


def covariance_distance(a: GaussianState, b: GaussianState) -> float:
    return float(np.max(np.abs(a.covariance - b.covariance)))


def flow_gaps(M: int, Ns, rg: str = "momentum", filt: WaveletFilter | None = None, L: float = 1.0, sector: str = "NS") -> list[tuple[int, float, float]]:
    """Convergence data of coarse-grained massless ground states at scale ``M``.

    For each ``N`` returns ``(N, distance to the scale-M ground state,
    distance to the previous N's coarse-grained state)``; the second entry
    is ``nan`` for the first ``N``.  The Cauchy gap shrinking with ``N``
    signals a limit state even where it differs from the bare ground state.
    """
    from .lattice import ground_state

    target = ground_state(build_spec(M, L, 0.0, sector))
    out = []
    prev = None
    for N in Ns:
        st = coarse_grain_state(ground_state(build_spec(N, L, 0.0, sector)), M, rg, filt, L, sector)
        gap = float("nan") if prev is None else covariance_distance(st, prev)
        out.append((int(N), covariance_distance(st, target), gap))
        prev = st
    return out


# ---------------------------------------------------------------------------
# scaling function


@dataclass(frozen=True, eq=False)
class ScalingFunctionSamples:
    """Scaling function on the dyadic grid ``2^-J Z`` over its support."""

    K: int
    J: int
    x: np.ndarray
    values: np.ndarray
    residual: float
    iterations: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "s"])
        for a, b in zip(self.x, self.values):
            w.writerow([repr(float(a)), repr(float(b))])
        return buf.getvalue()


def refine(filt: WaveletFilter, values: np.ndarray, J: int) -> np.ndarray:
    """Apply ``s(x) -> sqrt2 sum_l c_l s(2x - l)`` on the grid ``2^-J Z``."""
    n = len(values)
    out = np.zeros(n)
    i = np.arange(n)
    for l, c in enumerate(filt.coefficients):
        src = 2 * i - l * 2**J
        ok = (src >= 0) & (src < n)
        out[ok] += c * values[src[ok]]
    return np.sqrt(2) * out


def cascade(filt: WaveletFilter, J: int = 10, tol: float = 1e-8, max_iter: int = 5000) -> ScalingFunctionSamples:
    """Fixed-point iteration of the refinement relation from the box function.

    Raises
    ------
    NonConvergence
        If the sup-norm residual is still above ``tol`` after ``max_iter`` sweeps.
    """
    if J > 16:
        raise ValueError("grid resolution J is limited to 16")
    n = (filt.K - 1) * 2**J + 1
    x = np.arange(n) / 2**J
    s = ((x >= 0) & (x < 1)).astype(float)
    for it in range(1, max_iter + 1):
        new = refine(filt, s, J)
        res = float(np.max(np.abs(new - s)))
        s = new
        if res <= tol:
            final = float(np.max(np.abs(refine(filt, s, J) - s)))
            return ScalingFunctionSamples(filt.K, J, x, s, final, it)
    raise NonConvergence(f"cascade residual {res:.3e} above {tol:.1e} after {max_iter} iterations")


def scaling_function_fourier(filt: WaveletFilter, xi, factors: int = 25) -> np.ndarray:
    """Truncated infinite product ``prod_{j=1..factors} m0(xi / 2^j)``."""
    xi = np.asarray(xi, dtype=float)
    out = np.ones(xi.shape, dtype=complex)
    for j in range(1, factors + 1):
        out *= filt.symbol(xi / 2**j)
    return out
