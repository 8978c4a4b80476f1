"""Error bounds between lattice generators and their continuum counterparts.

Contains the chiral continuum reference generators, the momentum-space and
wavelet error curves, Sobolev norms of scaling functions, two-point
function convergence and power-law fits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFit, DeltaOutOfRange, ScaleOrderViolation
from .lattice import GaussianState, LatticeSpec, build_spec, ground_state
from .oar import WaveletFilter, daubechies_filter, scaling_function_fourier
from .virasoro import chiral_modes, koo_saleur_momentum_block, quasiparticle_block

#: Sobolev regularity of the Daubechies scaling functions (upper limits for delta).
SOBOLEV_CAPS = {2: 0.5, 4: 1.0, 6: 1.415, 8: 1.775, 10: 2.096, 12: 2.388}


@dataclass
class ErrorCurve:
    """Error values over UV scales with the parameters that produced them."""

    scales: list[int]
    values: list[float]
    metadata: dict = field(default_factory=dict)
    violations: list[int] = field(default_factory=list)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise ValueError("error values must be finite and nonnegative")
        start = self.metadata.get("M", -1) + 1
        self.violations = [
            n for n, a, b in zip(self.scales[1:], vals[:-1], vals[1:]) if n > start and b > a * (1 + 1e-12) + 1e-15
        ]

    @property
    def monotone(self) -> bool:
        return not self.violations

    def to_csv(self) -> str:
        lines = ["N,value"] + [f"{n},{v:.17g}" for n, v in zip(self.scales, self.values)]
        return "\n".join(lines) + "\n"

    def metadata_text(self) -> str:
        items = dict(self.metadata, monotone=self.monotone, violations=self.violations)
        return "{" + ", ".join(f'"{k}": {_json_value(v)}' for k, v in items.items()) + "}\n"


def _json_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float, np.integer, np.floating)):
        return repr(float(v)) if isinstance(v, (float, np.floating)) else str(int(v))
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    return '"' + str(v) + '"'


# ---------------------------------------------------------------------------
# chiral blocks


@dataclass(frozen=True, eq=False)
class ChiralBlock:
    """Generator restricted to the kept chiral modes, in quasi-particle form.

    ``D`` couples ``b+_p b_q``; ``pair_annihilation`` and ``pair_creation``
    hold the antisymmetric coefficients of ``b_p b_q`` and ``b+_p b+_q``
    (each summed with a factor one half).
    """

    kappa: int
    labels: np.ndarray
    branch: np.ndarray
    D: np.ndarray
    pair_annihilation: np.ndarray
    pair_creation: np.ndarray

    def bdg(self) -> np.ndarray:
        return np.block([[self.D, self.pair_creation], [self.pair_annihilation, -self.D.T]])


def _gauge(spec: LatticeSpec, slots: np.ndarray) -> np.ndarray:
    # removes the kernel phase and makes all chiral matrix elements real
    ls = spec.momentum_grid[slots]
    return np.exp(0.25j * spec.eps * ls - 0.25j * np.pi)


def lattice_chiral_block(spec: LatticeSpec, kappa: int, c: float, cutoff: float | None = None) -> ChiralBlock:
    """Koo-Saleur generator on the chiral modes with labels at most ``cutoff``."""
    slots, labels, branch = chiral_modes(spec, c)
    if cutoff is not None:
        keep = labels <= cutoff + 1e-9
        slots, labels, branch = slots[keep], labels[keep], branch[keep]
    Q = quasiparticle_block(spec, koo_saleur_momentum_block(spec, kappa * np.pi / spec.L), slots)
    g = _gauge(spec, slots)
    G = np.concatenate([g, g.conj()])
    Q = G[:, None] * Q * G.conj()[None, :]
    s = len(slots)
    return ChiralBlock(kappa, labels, branch, Q[:s, :s], Q[s:, :s], Q[:s, s:])


def continuum_virasoro_block(kappa: int, M: int, c: float = 0.5, gamma: float = 1.0, sector: str = "NS") -> ChiralBlock:
    """Continuum chiral generator on modes with labels up to ``2^M``.

    Per branch: ``L_kappa = sum (s - kappa/2) b+_{s-kappa} b_s`` plus pair
    terms with coefficient ``(s2 - s1)/2`` for ``s1 + s2 = kappa``, all scaled
    by ``gamma``.  ``c = 1`` repeats the block on a second branch.
    """
    if c not in (0.5, 1.0):
        raise ValueError("continuum reference exists for c = 1/2 and c = 1")
    top = 2**M
    if sector.upper() in ("NS",):
        base = np.arange(top) + 0.5
    else:
        base = np.arange(1, top + 1).astype(float)
    nb = 2 if c == 1.0 else 1
    labels = np.tile(base, nb)
    branch = np.repeat(np.arange(nb), len(base))
    s = len(labels)
    D = np.zeros((s, s))
    Pa = np.zeros((s, s))
    Pc = np.zeros((s, s))
    same = branch[:, None] == branch[None, :]
    lp, lq = labels[:, None], labels[None, :]
    mask = same & np.isclose(lp, lq - kappa)
    D[mask] = np.broadcast_to(lq - kappa / 2, D.shape)[mask]
    if kappa > 0:
        pm = same & np.isclose(lp + lq, kappa)
        Pa[pm] = ((lq - lp) / 2)[pm]
    elif kappa < 0:
        pm = same & np.isclose(lp + lq, -kappa)
        # adjoint of the annihilation block of -kappa
        Pc[pm] = ((lp - lq) / 2)[pm]
    return ChiralBlock(kappa, labels, branch, gamma * D, gamma * Pa, gamma * Pc)


def matching_constant(N: int, c: float = 0.5) -> float:
    """Normalization fixed by the lowest chiral mode of ``L_0`` at scale ``N``.

    The lowest mode has label one half in both chiral sectors, so ``c`` only
    selects the branch and does not change the value.
    """
    if c not in (0.5, 1.0):
        raise ValueError("matching constant exists for c = 1/2 and c = 1")
    return lowest_mode_l0(N) / 0.5


def lowest_mode_l0(N: int, L: float = 1.0) -> float:
    """Closed form of the ``L_0`` eigenvalue of the lowest chiral mode."""
    eps = L / 2**N
    l = np.pi / (2 * L)
    return L / (np.pi * eps) * (np.sin(0.5 * eps * l) + 0.5 * np.sin(eps * l))


def _aligned(lat: ChiralBlock, cont: ChiralBlock) -> ChiralBlock:
    """Reorder the continuum block onto the lattice mode order."""
    key = {(int(b), round(float(s), 6)): i for i, (b, s) in enumerate(zip(cont.branch, cont.labels))}
    idx = np.array([key[(int(b), round(float(s), 6))] for b, s in zip(lat.branch, lat.labels)])
    sel = np.ix_(idx, idx)
    return ChiralBlock(cont.kappa, cont.labels[idx], cont.branch[idx], cont.D[sel], cont.pair_annihilation[sel], cont.pair_creation[sel])


def block_errors(lat: ChiralBlock, cont: ChiralBlock) -> tuple[float, float]:
    """Diagonal (largest column norm) and off-diagonal (Hilbert-Schmidt) deviations."""
    cont = _aligned(lat, cont)
    dD = lat.D - cont.D
    diag = float(np.max(np.linalg.norm(dD, axis=0), initial=0.0))
    off = float(
        np.sqrt(
            np.linalg.norm(lat.pair_annihilation - cont.pair_annihilation) ** 2
            + np.linalg.norm(lat.pair_creation - cont.pair_creation) ** 2
        )
    )
    return diag, off


def momentum_error_curve(
    kappa: int,
    M: int,
    Ns,
    norm: str = "L2diagonal",
    c: float = 0.5,
    gamma: float | None = None,
) -> ErrorCurve:
    """Deviation of lattice generators from the continuum on modes up to ``2^M``.

    ``gamma`` defaults to the matching constant at the largest ``N``.

    Raises
    ------
    ScaleOrderViolation
        If ``M`` is not below every requested ``N``.
    """
    Ns = list(Ns)
    if not Ns or M >= min(Ns):
        raise ScaleOrderViolation(f"cutoff scale M={M} must lie below every N in {Ns}")
    if norm not in ("L2diagonal", "HSoffdiagonal"):
        raise ValueError(f"unknown norm {norm!r}")
    g = matching_constant(max(Ns), c) if gamma is None else gamma
    cont = continuum_virasoro_block(kappa, M, c, g)
    vals = []
    for N in Ns:
        spec = build_spec(N)
        if abs(kappa) * np.pi / spec.L >= np.pi / spec.eps:
            raise ScaleOrderViolation(f"k = {kappa} pi/L is beyond the lattice bound at N={N}")
        lat = lattice_chiral_block(spec, kappa, c, cutoff=2**M)
        d, o = block_errors(lat, cont)
        vals.append(d if norm == "L2diagonal" else o)
    meta = {"k": kappa, "M": M, "norm": norm, "rg": "momentum", "c": c, "gamma": g}
    return ErrorCurve(Ns, vals, meta)


# ---------------------------------------------------------------------------
# Sobolev norms and wavelet bounds


@dataclass(frozen=True)
class SobolevResult:
    value: float
    truncation: float
    divergent: bool
    block_ratio: float


def sobolev_norm(
    filt: WaveletFilter,
    delta: float,
    cutoff_exp: int = 12,
    points_per_unit: int = 24,
    factors: int = 25,
) -> SobolevResult:
    """``H^delta`` norm of the scaling function from its Fourier transform.

    The integral of ``|s^(xi)|^2 (1 + xi^2)^delta / 2pi`` is computed on
    ``|xi| <= 2^cutoff_exp`` in dyadic blocks; the remainder is extrapolated
    geometrically from the last two blocks and returned as ``truncation``.
    A last-block ratio of one or more flags divergence.
    """
    edges = [0.0] + [2.0**j for j in range(0, cutoff_exp + 1)]
    blocks = []
    for a, b in zip(edges[:-1], edges[1:]):
        n = max(64, int((b - a) * points_per_unit)) | 1
        xi = np.linspace(a, b, n)
        f = np.abs(scaling_function_fourier(filt, xi, factors)) ** 2 * (1 + xi**2) ** delta
        w = np.full(n, 2.0)
        w[1::2] = 4.0
        w[0] = w[-1] = 1.0
        blocks.append((b - a) / (n - 1) / 3 * float(w @ f))
    # symmetric integrand: double the half line
    blocks = np.array(blocks) / np.pi
    ratio = blocks[-1] / blocks[-2]
    body = float(blocks.sum())
    if ratio >= 1:
        return SobolevResult(float("inf"), float("inf"), True, float(ratio))
    tail = float(blocks[-1] * ratio / (1 - ratio))
    return SobolevResult(float(np.sqrt(body + tail)), float(np.sqrt(body + tail) - np.sqrt(body)), False, float(ratio))


def wavelet_bound(K: int, M: int, N: int, delta: float, rate: float = 1.0) -> float:
    """Factorized bound ``||s_K||_{H^delta} 2^{-(N-M) delta rate}``."""
    cap = SOBOLEV_CAPS[K]
    if not 0 < delta < cap:
        raise DeltaOutOfRange(f"delta={delta} outside (0, {cap}) for the {K}-tap filter")
    if N < M:
        raise ScaleOrderViolation(f"N={N} below M={M}")
    res = sobolev_norm(daubechies_filter(K), delta)
    if res.divergent:
        raise DeltaOutOfRange(f"Sobolev norm of order {delta} diverges for the {K}-tap filter")
    return res.value * 2.0 ** (-(N - M) * delta * rate)


def wavelet_error_curve(K: int, M: int, Ns, delta: float, rate: float = 1.0) -> ErrorCurve:
    """Wavelet bound over UV scales; ``rate`` is the documented exponent factor."""
    Ns = list(Ns)
    cap = SOBOLEV_CAPS.get(K)
    if cap is None:
        daubechies_filter(K)
    if not 0 < delta < cap:
        raise DeltaOutOfRange(f"delta={delta} outside (0, {cap}) for the {K}-tap filter")
    res = sobolev_norm(daubechies_filter(K), delta)
    if res.divergent:
        raise DeltaOutOfRange(f"Sobolev norm of order {delta} diverges for the {K}-tap filter")
    vals = [res.value * 2.0 ** (-(N - M) * delta * rate) for N in Ns]
    meta = {"K": K, "M": M, "delta": delta, "rate": rate, "rg": "wavelet", "sobolev": res.value, "c": 0}
    return ErrorCurve(Ns, vals, meta)


# ---------------------------------------------------------------------------
# two-point function


def lattice_two_point(spec: LatticeSpec, state: GaussianState, i: int, j: int) -> complex:
    """Mixed-component correlator ``(<p1+_x p2_y> - <p2+_x p1_y>) / (2 eps)`` between sites ``i``, ``j``."""
    m = spec.n_modes
    C = state.covariance
    a = C[2 * i, m + 2 * j + 1]
    b = C[m + 2 * i + 1, 2 * j]
    return (a - b) / (2 * spec.eps)


def continuum_two_point(u, L: float = 1.0):
    """Massless kernel ``-1 / (4 L sin(pi u / 2L))`` at separation ``u``."""
    return -1.0 / (4 * L * np.sin(np.pi * np.asarray(u) / (2 * L)))


def two_point_error(N: int, separations=(0.25, 0.5, 0.75)) -> float:
    """Largest deviation from the continuum kernel over separations (units of ``L``)."""
    spec = build_spec(N)
    st = ground_state(spec)
    err = 0.0
    for d in separations:
        steps = d * spec.L / spec.eps
        if abs(steps - round(steps)) > 1e-9:
            raise ValueError(f"separation {d} L not on the scale-{N} grid")
        i = int(round(steps))
        g = lattice_two_point(spec, st, i, 0)
        err = max(err, abs(g - continuum_two_point(d * spec.L, spec.L)))
    return float(err)


def two_point_error_curve(Ns, separations=(0.25, 0.5, 0.75)) -> ErrorCurve:
    Ns = list(Ns)
    return ErrorCurve(Ns, [two_point_error(N, separations) for N in Ns], {"observable": "two-point", "M": -1})


# ---------------------------------------------------------------------------
# fits


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    intercept: float
    residual: float


def fit_decay(curve_or_scales, values=None, floor: float = 1e-13) -> DecayFit:
    """Least-squares slope of ``log(error)`` against ``log(n)``, ``n = 2^(N+1)``.

    Raises
    ------
    DegenerateFit
        With fewer than four points or values at the numerical floor.
    """
    if isinstance(curve_or_scales, ErrorCurve):
        Ns, vals = curve_or_scales.scales, curve_or_scales.values
    else:
        Ns, vals = curve_or_scales, values
    Ns = np.asarray(Ns, dtype=float)
    vals = np.asarray(vals, dtype=float)
    if len(Ns) < 4:
        raise DegenerateFit("need at least four points")
    if np.any(vals < floor):
        raise DegenerateFit(f"values below the numerical floor {floor:g}")
    x = (Ns + 1) * np.log(2)
    y = np.log(vals)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return DecayFit(float(coef[0]), float(coef[1]), resid)
