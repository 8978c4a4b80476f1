"""Command-line front end: ``latcft <subcommand> [options]``.

Every option can also be given in a flat ``key=value`` config file passed
with ``--config``; flags on the command line override the file.  Each run
writes CSV files plus a ``.meta`` sidecar into ``--out`` and prints a
one-line summary.  Library errors map to the exit codes in
:mod:`latcft.errors`.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, LatCFTError


# ---------------------------------------------------------------------------
# option parsing


def int_range(text: str) -> list[int]:
    """``"5..10"``, ``"3,5,7"`` or ``"6"`` to a list of integers."""
    out: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if ".." in part:
            a, b = part.split("..", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ValueError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise ValueError("empty integer list")
    return out


def _parity(text: str) -> int | None:
    t = str(text).strip().lower()
    if t in ("", "none", "auto"):
        return None
    v = int(t)
    if v not in (1, -1):
        raise ValueError("parity must be +1, -1 or none")
    return v


def _flag(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off", ""):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class Option:
    key: str
    convert: object
    default: object
    help: str = ""


GLOBAL_OPTIONS = [
    Option("out", str, "out", "output directory"),
    Option("seed", int, 0, "seed for randomized paths"),
    Option("threads", int, 1, "worker threads for parameter scans"),
    Option("gnuplot", _flag, False, "also write gnuplot scripts"),
]

_LATTICE = [
    Option("N", int, 3, "scale; the chain has 2^(N+1) sites"),
    Option("L", float, 1.0, "half length of the circle"),
    Option("lambda", float, 0.0, "mass parameter"),
    Option("sector", str, "NS", "NS (antiperiodic) or R (periodic)"),
]

COMMANDS: dict[str, tuple[str, list[Option]]] = {
    "spectrum": ("dispersion and Bogoliubov amplitudes", _LATTICE),
    "ground-state": (
        "ground-state covariance",
        _LATTICE
        + [
            Option("parity", _parity, None, "parity sector when zero modes exist"),
            Option("basis", str, "momentum", "momentum or position"),
        ],
    ),
    "correlator": (
        "<a+_i(t) a_j> under a Koo-Saleur generator",
        [
            Option("N", int, 3),
            Option("sector", str, "NS"),
            Option("k", int, 1, "generator momentum in units of pi/L"),
            Option("phi", float, 0.0, "phase of the Hermitian combination"),
            Option("i", int, 0, "mode of the creation operator"),
            Option("j", int, 0, "mode of the annihilation operator"),
            Option("t0", float, 0.0),
            Option("t1", float, 1.0),
            Option("nt", int, 11, "number of time points"),
        ],
    ),
    "virasoro-check": (
        "commutator form against the explicit momentum kernel",
        [
            Option("N", int_range, [1, 2, 3, 4, 5, 6]),
            Option("sector", str, "NS"),
            Option("kmax", int, 4, "largest |k| in units of pi/L"),
            Option("variant", str, "corrected", "kernel variant: corrected or printed"),
        ],
    ),
    "central-charge": (
        "central charge from the lattice Virasoro commutator",
        [
            Option("N", int_range, [6]),
            Option("k", int, 2, "mode in units of pi/L"),
            Option("sector", str, "c12", "c0, c12 or c1"),
            Option("method", str, "projected", "projected or full"),
        ],
    ),
    "rg-flow": (
        "coarse-grained ground states against the coarse ground state",
        [
            Option("rg", str, "momentum", "momentum or wavelet"),
            Option("K", int, 4, "wavelet filter length"),
            Option("M", int, 3, "coarse scale"),
            Option("N", int_range, [4, 5, 6, 7]),
            Option("sector", str, "NS"),
        ],
    ),
    "wavelet-cascade": (
        "scaling function by the cascade algorithm",
        [
            Option("K", int, 4, "filter length"),
            Option("J", int, 10, "dyadic resolution"),
            Option("tol", float, 1e-8),
        ],
    ),
    "error-curves": (
        "approximation error of lattice generators over UV scales",
        [
            Option("rg", str, "momentum", "momentum or wavelet"),
            Option("k", int, 0, "generator momentum in units of pi/L"),
            Option("M", int, 4, "simulation scale"),
            Option("N", int_range, [5, 6, 7, 8, 9, 10]),
            Option("c", float, 0.5, "chiral sector: 0.5 or 1"),
            Option("K", int, 4, "wavelet filter length"),
            Option("delta", float, 0.5, "Sobolev order"),
            Option("rate", float, 1.0, "exponent factor of the wavelet bound"),
        ],
    ),
    "circuit-sim": (
        "statevector pipeline against the Gaussian engine",
        [
            Option("sites", int, 4, "number of sites (power of two)"),
            Option("k", int, 1, "generator momentum in units of pi/L"),
            Option("t", float, 0.5),
            Option("steps", int, 64),
            Option("order", int, 2),
            Option("mode", float, 0.5, "momentum of the inserted field mode, units of pi/L"),
        ],
    ),
    "reproduce-supplement": ("every family of error curves in one run", []),
}


def _read_config(path: str) -> dict[str, tuple[str, int]]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        out[key] = (value, lineno)
    return out


def resolve_options(command: str, flags: dict, config_path: str | None) -> dict:
    """Defaults, then config file, then command-line flags."""
    options = {o.key: o for o in GLOBAL_OPTIONS + COMMANDS[command][1]}
    values = {k: o.default for k, o in options.items()}
    if config_path:
        for key, (raw, lineno) in _read_config(config_path).items():
            if key not in options:
                raise ConfigError(f"{config_path}:{lineno}: unknown key {key!r} for {command}")
            try:
                values[key] = options[key].convert(raw)
            except ValueError as exc:
                raise ConfigError(f"{config_path}:{lineno}: key {key!r}: {exc}") from None
    for key, raw in flags.items():
        try:
            values[key] = options[key].convert(raw)
        except ValueError as exc:
            raise ConfigError(f"--{key}: {exc}") from None
    return values


def build_parser() -> argparse.ArgumentParser:
    glob = argparse.ArgumentParser(add_help=False)
    for o in GLOBAL_OPTIONS:
        if o.key == "gnuplot":
            glob.add_argument("--gnuplot", action="store_const", const=True, default=argparse.SUPPRESS, help=o.help)
        else:
            glob.add_argument(f"--{o.key}", default=argparse.SUPPRESS, help=o.help)
    glob.add_argument("--config", default=argparse.SUPPRESS, help="flat key=value config file")
    parser = argparse.ArgumentParser(prog="latcft", description="Lattice conformal field theory experiments.", parents=[glob])
    parser.add_argument("--version", action="version", version=f"latcft {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (desc, opts) in COMMANDS.items():
        p = sub.add_parser(name, help=desc, description=desc, parents=[glob])
        for o in opts:
            p.add_argument(f"--{o.key}", dest=o.key, default=argparse.SUPPRESS, help=o.help)
    return parser


# ---------------------------------------------------------------------------
# output


class Output:
    """Writes artifacts into one directory and remembers their names."""

    def __init__(self, directory: str, gnuplot: bool):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.gnuplot = gnuplot
        self.files: list[str] = []

    def write(self, name: str, text: str) -> Path:
        path = self.dir / name
        path.write_text(text)
        self.files.append(name)
        return path

    def meta(self, name: str, meta: dict) -> Path:
        # the output directory is left out so reruns elsewhere stay byte-identical
        meta = {k: v for k, v in meta.items() if k != "out"}
        return self.write(name, json.dumps(_plain(meta), sort_keys=True, indent=1) + "\n")

    def table(self, name: str, header: list[str], rows, meta: dict, logy: bool = False) -> Path:
        lines = [",".join(header)] + [",".join(_fmt(v) for v in row) for row in rows]
        path = self.write(name, "\n".join(lines) + "\n")
        self.meta(Path(name).stem + ".meta", meta)
        if self.gnuplot:
            self.write(Path(name).stem + ".gp", _gnuplot(name, len(header), logy))
        return path


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, float) and not np.isfinite(x):
        return str(x)
    return x


def _gnuplot(csv_name: str, ncols: int, logy: bool) -> str:
    stem = Path(csv_name).stem
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set terminal pngcairo size 800,600",
        f"set output '{stem}.png'",
    ]
    if logy:
        lines.append("set logscale y")
    lines.append(f"plot for [i=2:{ncols}] '{csv_name}' using 1:i with linespoints")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommands


def _spec(v: dict):
    from .lattice import build_spec

    return build_spec(v["N"], v["L"], v["lambda"], v["sector"])


def cmd_spectrum(v: dict, out: Output) -> str:
    from .lattice import diagonalize

    spec = _spec(v)
    sd = diagonalize(spec)
    rows = [(i, k, w, abs(a), abs(b)) for i, (k, w, a, b) in enumerate(zip(sd.momenta, sd.omega, sd.u, sd.v))]
    out.table("spectrum.csv", ["index", "k", "omega", "u_abs", "v_abs"], rows, {"command": "spectrum", **v})
    return f"ground energy {sd.offset:.12g}; {len(sd.zero_modes)} zero mode(s); gap {np.min(sd.omega):.6g}"


def cmd_ground_state(v: dict, out: Output) -> str:
    from .lattice import covariance_csv, diagonalize, ground_state

    spec = _spec(v)
    if v["basis"] not in ("momentum", "position"):
        raise ConfigError(f"basis must be momentum or position, got {v['basis']!r}")
    st = ground_state(spec, v["parity"])
    out.write("ground_state.csv", covariance_csv(spec, st, v["basis"]))
    out.meta("ground_state.meta", {"command": "ground-state", **v, "parity_out": st.parity})
    return f"ground energy {diagonalize(spec).offset:.12g}; parity {st.parity:+d}"


def cmd_correlator(v: dict, out: Output) -> str:
    from .gaussian import FermionField, conformal_correlator, correlator_scan
    from .lattice import build_spec, ground_state
    from .virasoro import koo_saleur

    spec = build_spec(v["N"], sector=v["sector"])
    m = spec.n_modes
    for key in ("i", "j"):
        if not 0 <= v[key] < m:
            raise ConfigError(f"mode {key}={v[key]} outside 0..{m - 1}")
    if v["nt"] < 1:
        raise ConfigError("nt must be positive")
    gen = koo_saleur(spec, v["k"] * np.pi / spec.L, chirality="hermitian", phi=v["phi"]).payload
    st = ground_state(spec)
    left = FermionField.creator(m, v["i"])
    right = FermionField.annihilator(m, v["j"])
    ts = np.linspace(v["t0"], v["t1"], v["nt"])
    vals = correlator_scan(lambda t: conformal_correlator(st, [left], [right], gen, t), [(t,) for t in ts], v["threads"])
    # <a+_i exp(itG) a_j exp(-itG)> = <a+_i a_j(t)>
    rows = [(t, z.real, z.imag) for t, z in zip(ts, vals)]
    out.table("correlator.csv", ["t", "re", "im"], rows, {"command": "correlator", **v})
    return f"correlator at t={ts[-1]:.6g}: {vals[-1].real:.10g}{vals[-1].imag:+.10g}i"


def cmd_virasoro_check(v: dict, out: Output) -> str:
    from .lattice import build_spec
    from .virasoro import koo_saleur, koo_saleur_limit, koo_saleur_momentum_block, to_momentum

    rows = []
    for N in v["N"]:
        spec = build_spec(N, sector=v["sector"])
        for kap in range(-v["kmax"], v["kmax"] + 1):
            k = kap * np.pi / spec.L
            if abs(k) >= np.pi / spec.eps - 1e-12:
                continue
            op = koo_saleur_limit(spec) if kap == 0 else koo_saleur(spec, k).payload
            M, c = to_momentum(spec, op)
            blk = koo_saleur_momentum_block(spec, k, v["variant"])
            err = max(float(np.max(np.abs(blk.bdg().toarray() - M))), abs(blk.constant - c))
            rows.append((N, kap, err))
    out.table("virasoro_check.csv", ["N", "k", "max_abs_error"], rows, {"command": "virasoro-check", **v})
    worst = max(r[2] for r in rows)
    return f"max deviation between the two forms {worst:.3e} over {len(rows)} generators"


def cmd_central_charge(v: dict, out: Output) -> str:
    from .gaussian import correlator_scan
    from .lattice import build_spec
    from .virasoro import CENTRAL_CHARGES, central_charge_estimate

    if v["sector"] not in CENTRAL_CHARGES:
        raise ConfigError(f"sector must be one of {sorted(CENTRAL_CHARGES)}")
    target = CENTRAL_CHARGES[v["sector"]]

    def one(N):
        spec = build_spec(N)
        return central_charge_estimate(spec, v["k"] * np.pi / spec.L, v["sector"], v["method"])

    vals = correlator_scan(one, [(N,) for N in v["N"]], v["threads"])
    rows = [(N, v["k"], v["sector"], c, abs(c - target)) for N, c in zip(v["N"], vals)]
    out.table("central_charge.csv", ["N", "k", "sector", "estimate", "deviation"], rows, {"command": "central-charge", **v})
    return f"central charge estimate {vals[-1]:.10g} at N={v['N'][-1]} (target {target})"


def cmd_rg_flow(v: dict, out: Output) -> str:
    from .oar import daubechies_filter, flow_gaps

    filt = daubechies_filter(v["K"]) if v["rg"] == "wavelet" else None
    if v["rg"] not in ("momentum", "wavelet"):
        raise ConfigError(f"rg must be momentum or wavelet, got {v['rg']!r}")
    rows = flow_gaps(v["M"], v["N"], v["rg"], filt, sector=v["sector"])
    out.table("rg_flow.csv", ["N", "distance_to_ground_state", "gap_to_previous"], rows, {"command": "rg-flow", **v}, logy=True)
    return f"distance at N={rows[-1][0]}: {rows[-1][1]:.3e}; last gap {rows[-1][2]:.3e}"


def cmd_wavelet_cascade(v: dict, out: Output) -> str:
    from .oar import cascade, daubechies_filter

    filt = daubechies_filter(v["K"])
    out.write(f"filter_D{v['K']}.csv", filt.to_csv())
    res = cascade(filt, v["J"], v["tol"])
    out.write(f"cascade_D{v['K']}.csv", res.to_csv())
    meta = {"command": "wavelet-cascade", **v, "iterations": res.iterations, "residual": res.residual}
    out.meta(f"cascade_D{v['K']}.meta", meta)
    return f"D{v['K']} cascade converged in {res.iterations} iterations (residual {res.residual:.2e})"


def _curve_rows(Ns, columns):
    return [(N, *(col[i] for col in columns)) for i, N in enumerate(Ns)]


def cmd_error_curves(v: dict, out: Output) -> str:
    from .erroranalysis import fit_decay, momentum_error_curve, wavelet_error_curve

    if v["rg"] == "momentum":
        diag = momentum_error_curve(v["k"], v["M"], v["N"], "L2diagonal", v["c"])
        off = momentum_error_curve(v["k"], v["M"], v["N"], "HSoffdiagonal", v["c"])
        meta = {"command": "error-curves", **v, "diagonal": diag.metadata, "monotone": diag.monotone, "violations": diag.violations}
        out.table("error_curves.csv", ["N", "L2diagonal", "HSoffdiagonal"], _curve_rows(v["N"], [diag.values, off.values]), meta, logy=True)
        fit = fit_decay(diag) if len(v["N"]) >= 4 else None
        tail = f"; decay exponent {fit.exponent:.3f}" if fit else ""
        return f"momentum error curve k={v['k']} M={v['M']}: monotone={diag.monotone}, max HS off-diagonal {max(off.values):.3e}{tail}"
    if v["rg"] == "wavelet":
        curve = wavelet_error_curve(v["K"], v["M"], v["N"], v["delta"], v["rate"])
        meta = {"command": "error-curves", **v, "curve": curve.metadata, "monotone": curve.monotone}
        out.table("error_curves.csv", ["N", "bound"], _curve_rows(v["N"], [curve.values]), meta, logy=True)
        return f"wavelet bound D{v['K']} delta={v['delta']}: {curve.values[-1]:.4g} at N={v['N'][-1]}"
    raise ConfigError(f"rg must be momentum or wavelet, got {v['rg']!r}")


def cmd_circuit_sim(v: dict, out: Output) -> str:
    from .circuits import fit_trotter, ground_state_prep_circuit, pipeline_correlator
    from .lattice import build_spec, build_staggered_hamiltonian
    from .virasoro import koo_saleur

    sites = v["sites"]
    if sites < 2 or sites & (sites - 1):
        raise ConfigError(f"sites must be a power of two >= 2, got {sites}")
    spec = build_spec(int(np.log2(sites)) - 1)
    gen = koo_saleur(spec, v["k"] * np.pi / spec.L, chirality="hermitian").payload
    obs = build_staggered_hamiltonian(spec)
    res = pipeline_correlator(spec, gen, obs, v["mode"] * np.pi / spec.L, v["t"], v["steps"], v["order"])
    scan = tuple(s for s in (4, 8, 16, 32, 64) if s <= max(v["steps"], 64))
    fit = fit_trotter(gen, v["t"], scan, v["order"])
    # many-body operator norm: |constant| plus half the positive BdG energies
    norm_obs = 0.25 * float(np.sum(np.abs(np.linalg.eigvalsh(obs.bdg())))) + abs(obs.constant)
    bound = 2 * norm_obs * fit.bound(v["steps"])
    disc = abs(res["statevector"] - res["gaussian"])
    out.write("circuit.txt", ground_state_prep_circuit(spec).to_text())
    rows = [
        ("statevector_re", res["statevector"].real),
        ("gaussian_re", res["gaussian"].real),
        ("discrepancy", disc),
        ("trotter_bound", bound),
        ("trotter_order_fit", fit.order),
        ("gadget_probability", res["probability"]),
    ]
    out.table("circuit_sim.csv", ["quantity", "value"], rows, {"command": "circuit-sim", **v, "trotter_errors": list(fit.errors), "trotter_steps": list(fit.steps)})
    verdict = "below" if disc <= bound else "ABOVE"
    return f"|statevector - gaussian| = {disc:.3e}, {verdict} the Trotter bound {bound:.3e} (fitted order {fit.order:.3f})"


def cmd_reproduce_supplement(v: dict, out: Output) -> str:
    from .erroranalysis import SOBOLEV_CAPS, momentum_error_curve, wavelet_error_curve

    Ns = list(range(4, 10))
    M = 3
    # wavelet bounds at a common order below the Haar cap, over K
    Ks = sorted(SOBOLEV_CAPS)
    s1 = [wavelet_error_curve(K, M, Ns, 0.45) for K in Ks]
    out.table("wavelet_bound_vs_K.csv", ["N"] + [f"D{K}" for K in Ks], _curve_rows(Ns, [c.values for c in s1]), {"curves": "wavelet_bound_vs_K", "M": M, "delta": 0.45}, logy=True)
    deltas = [0.25, 0.5, 0.75, 0.95]
    s2 = [wavelet_error_curve(4, M, Ns, d) for d in deltas]
    out.table("wavelet_bound_vs_delta.csv", ["N"] + [f"delta={d}" for d in deltas], _curve_rows(Ns, [c.values for c in s2]), {"curves": "wavelet_bound_vs_delta", "M": M, "K": 4}, logy=True)
    s3 = [momentum_error_curve(0, M, Ns, "L2diagonal", c) for c in (0.5, 1.0)]
    out.table("momentum_L0_diagonal.csv", ["N", "c=1/2", "c=1"], _curve_rows(Ns, [c.values for c in s3]), {"curves": "momentum_L0_diagonal", "M": M, "k": 0}, logy=True)
    ks = [1, 2, 3, 4]
    s4 = [momentum_error_curve(k, M, Ns, "L2diagonal") for k in ks]
    out.table("momentum_Lk_diagonal.csv", ["N"] + [f"k={k}" for k in ks], _curve_rows(Ns, [c.values for c in s4]), {"curves": "momentum_Lk_diagonal", "M": M, "c": 0.5}, logy=True)
    ks5 = [0, 1, 2, 3, 4]
    s5 = [momentum_error_curve(k, M, Ns, "HSoffdiagonal") for k in ks5]
    out.table("momentum_offdiagonal_HS.csv", ["N"] + [f"k={k}" for k in ks5], _curve_rows(Ns, [c.values for c in s5]), {"curves": "momentum_offdiagonal_HS", "M": M, "c": 0.5}, logy=True)
    bad = [c.metadata for c in s1 + s2 + s3 + s4 if not c.monotone]
    return f"wrote 5 curve files; {len(bad)} non-monotone curve(s)"


RUNNERS = {
    "spectrum": cmd_spectrum,
    "ground-state": cmd_ground_state,
    "correlator": cmd_correlator,
    "virasoro-check": cmd_virasoro_check,
    "central-charge": cmd_central_charge,
    "rg-flow": cmd_rg_flow,
    "wavelet-cascade": cmd_wavelet_cascade,
    "error-curves": cmd_error_curves,
    "circuit-sim": cmd_circuit_sim,
    "reproduce-supplement": cmd_reproduce_supplement,
}


def run(argv: list[str] | None = None) -> int:
    """Parse ``argv``, run the subcommand and return the exit code."""
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    flags = dict(vars(ns))
    command = flags.pop("command")
    config = flags.pop("config", None)
    try:
        values = resolve_options(command, flags, config)
        out = Output(values["out"], values["gnuplot"])
        summary = RUNNERS[command](values, out)
    except LatCFTError as exc:
        print(f"latcft {command}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    print(summary)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
