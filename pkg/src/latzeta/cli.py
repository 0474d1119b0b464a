"""Command line driver with CSV/JSON reporting.

Subcommands: zeta, pi, fit-g, ledger, heat-constant, kirchhoff, dimension.
Every run emits a metadata header (version, walk, seed, tolerance); rows
follow the schema walk,shape,R,N,method,value,stderr,seed,tol,runtime_ms,
notes.  Reruns with identical flags produce identical bytes unless
--timings is given (the runtime column is left empty by default for that
reason).  Exit codes: 0 success, 1 usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__, experiments, kernels, spectra
from .domains import DomainError, build_domain
from .kernels import KernelError
from .linalg import SolverError
from .operators import OperatorError, assemble
from .walks import (
    BUILTIN_NAMES,
    ConductanceError,
    WalkError,
    builtin_walk,
    sample_environment,
)

SCHEMA = ["walk", "shape", "R", "N", "method", "value", "stderr", "seed", "tol",
          "runtime_ms", "notes"]

NUMERICAL_ERRORS = (
    SolverError,
    KernelError,
    OperatorError,
    DomainError,
    WalkError,
    ConductanceError,
    spectra.SpectraError,
    experiments.ExperimentError,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage problems exit 1 (argparse defaults to 2)
    def error(self, message):
        raise UsageError(message)


def _fmt(value) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, float):
        return repr(value)
    text = str(value)
    if "," in text or '"' in text:
        text = '"' + text.replace('"', '""') + '"'
    return text


def make_row(walk="", shape="", radius="", n="", method="", value="", stderr="",
             seed="", tol="", runtime_ms="", notes="") -> dict:
    return {
        "walk": walk, "shape": shape, "R": radius, "N": n, "method": method,
        "value": value, "stderr": stderr, "seed": seed, "tol": tol,
        "runtime_ms": runtime_ms, "notes": notes,
    }


def write_csv(fh, metadata: dict, rows: list, columns=None) -> None:
    for key, value in metadata.items():
        fh.write(f"# {key}={value}\n")
    columns = columns or SCHEMA
    fh.write(",".join(columns) + "\n")
    for row in rows:
        fh.write(",".join(_fmt(row.get(c, "")) for c in columns) + "\n")


def write_json(fh, metadata: dict, rows: list) -> None:
    payload = {"metadata": metadata, "rows": rows}
    json.dump(payload, fh, indent=2, default=_fmt)
    fh.write("\n")


def _emit(args, metadata: dict, rows: list, columns=None) -> None:
    out = open(args.output, "w") if args.output else sys.stdout
    try:
        if args.out == "json":
            write_json(out, metadata, rows)
        else:
            write_csv(out, metadata, rows, columns)
    finally:
        if args.output:
            out.close()


def _metadata(args, **extra) -> dict:
    meta = {"latzeta": __version__, "command": args.command}
    for key in ("walk", "seed", "tol"):
        if hasattr(args, key) and getattr(args, key) is not None:
            meta[key] = getattr(args, key)
    meta.update(extra)
    return meta


def _walk_from_args(args):
    walk = builtin_walk(args.walk, laziness_override=args.laziness)
    return walk


def _maybe_runtime(args, started: float):
    if getattr(args, "timings", False):
        return int(round(1000.0 * (time.monotonic() - started)))
    return ""


def _parse_radii(text: str) -> list:
    values = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if ":" in chunk:
            parts = [int(p) for p in chunk.split(":")]
            start, stop = parts[0], parts[1]
            step = parts[2] if len(parts) > 2 else 1
            values.extend(range(start, stop + 1, step))
        elif chunk:
            values.append(int(chunk))
    if not values:
        raise UsageError(f"no radii in {text!r}")
    return values


# -- subcommands -----------------------------------------------------------


def cmd_zeta(args) -> list:
    started = time.monotonic()
    if args.env_seed is not None:
        if args.shape != "square":
            raise UsageError("conductance environments support square domains only")
        extent = args.R + 2
        env = sample_environment(extent, args.env_c1, args.env_c2, args.env_seed,
                                 laziness=0.5 if args.laziness is None else args.laziness)
        walk_label = f"rcm(seed={args.env_seed})"
        dom = build_domain("square", args.R, builtin_walk("srw"))
        op = assemble(env, dom)
    else:
        walk = _walk_from_args(args)
        walk_label = walk.name
        dom = build_domain(args.shape, args.R, walk)
        op = assemble(walk, dom)
    if args.dump_operator:
        with open(args.dump_operator, "w") as fh:
            op.export_coo(fh)
    if args.method == "dense":
        result = spectra.zeta_from_spectrum(spectra.dense_spectrum(op, cap=args.dense_cap))
    elif args.method == "exact":
        result = spectra.zeta_exact(op, tol=args.tol)
    else:
        result = spectra.zeta_hutchinson(op, probes=args.probes, tol=args.tol,
                                         seed=args.seed)
    row = make_row(
        walk=walk_label, shape=args.shape, radius=args.R, n=op.n,
        method=result.method, value=result.value,
        stderr="" if result.stderr is None else result.stderr,
        seed="" if result.seed is None else result.seed,
        tol=args.tol, runtime_ms=_maybe_runtime(args, started),
    )
    return [row]


def cmd_pi(args) -> list:
    started = time.monotonic()
    estimates = experiments.run_pi_table(
        [args.walk], [args.R], method=args.method, tol=args.tol,
        threads=args.threads,
    )
    rows = []
    for est in estimates:
        rows.append(
            make_row(
                walk=est.walk, shape="square", radius=est.radius, n=est.n,
                method=est.method, value=est.pi_approx, tol=args.tol,
                runtime_ms=_maybe_runtime(args, started),
                notes=f"trace={est.trace!r};prefactor={est.prefactor!r};"
                      f"abs_error={est.abs_error!r}",
            )
        )
    return rows


def cmd_fit_g(args) -> list:
    started = time.monotonic()
    report = experiments.run_g_fit(
        args.walk, _parse_radii(args.radii), shape=args.shape,
        method=args.method, tol=args.tol, threads=args.threads,
    )
    rows = []
    for radius, n, z in zip(report.radii, report.ns, report.traces):
        rows.append(
            make_row(walk=report.walk, shape=report.shape, radius=int(radius),
                     n=int(n), method=args.method, value=float(z), tol=args.tol)
        )
    rows.append(
        make_row(
            walk=report.walk, shape=report.shape, method="nlogn_fit",
            value=report.a, stderr=report.a_stderr, tol=args.tol,
            runtime_ms=_maybe_runtime(args, started),
            notes=f"b={report.b!r};target={report.target!r};"
                  f"rel_err={report.a_relative_error!r}",
        )
    )
    return rows


def cmd_ledger(args) -> list:
    started = time.monotonic()
    rows = experiments.run_ledger(args.walk, args.R, args.eta, tol=args.tol)
    out = []
    for row in rows:
        details = ";".join(f"{k}={v}" for k, v in row.details.items())
        out.append(
            make_row(
                walk=args.walk, shape="square", radius=args.R, method="ledger",
                value=row.measured, tol=args.tol,
                runtime_ms=_maybe_runtime(args, started),
                notes=f"{row.source} | {row.reference} | {details}",
            )
        )
    return out


def cmd_heat_constant(args):
    walk = _walk_from_args(args)
    origin = tuple(int(c) for c in args.origin.split(","))
    series = kernels.evolve_full(walk, origin, args.tmax, strategy=args.strategy,
                                 window_cap=args.window_cap)
    meta = {}
    if args.tmax >= 8 * max(1, args.t_min):
        fit = kernels.fit_qh_rate(series, t_min=args.t_min)
        meta = {
            "g_hat": repr(fit.g_hat),
            "delta_hat": repr(fit.delta_hat),
            "g_band": repr(fit.g_band),
            "parity": fit.parity,
        }
    rows = [
        {"t": t, "p_t": float(p), "t_p_t": t * float(p)}
        for t, p in enumerate(series.values)
    ]
    return rows, meta


def cmd_kirchhoff(args) -> list:
    started = time.monotonic()
    if args.graph == "k2":
        edges, n = [(0, 1)], 2
    elif args.graph == "p3":
        edges, n = [(0, 1), (1, 2)], 3
    elif args.graph == "cycle":
        n = args.n
        edges = [(i, (i + 1) % n) for i in range(n)]
    elif args.graph == "random":
        n = args.n
        rng = np.random.Generator(np.random.Philox(key=args.seed))
        edges = [(i, int(rng.integers(0, i))) for i in range(1, n)]  # random tree
        extra = max(1, n // 2)
        for _ in range(extra):
            u, v = (int(x) for x in rng.integers(0, n, size=2))
            if u != v:
                edges.append((min(u, v), max(u, v)))
        edges = sorted(set((min(u, v), max(u, v)) for u, v in edges))
    else:
        raise UsageError(f"unknown graph preset {args.graph!r}")
    result = spectra.kirchhoff_check(edges, n)
    runtime = _maybe_runtime(args, started)
    common = dict(walk="-", shape=f"graph:{args.graph}", radius=result.n, n=result.n,
                  seed=args.seed if args.graph == "random" else "")
    return [
        make_row(method="resistance_sum", value=result.resistance_total,
                 runtime_ms=runtime, **common),
        make_row(method="spectral", value=result.spectral_total, **common),
        make_row(method="rw_volume_variant", value=result.rw_volume_variant,
                 notes="inspection only; does not equal the resistance sum in general",
                 **common),
    ]


def cmd_dimension(args) -> list:
    started = time.monotonic()
    rows = experiments.run_dimension_sanity(
        path_radii=_parse_radii(args.path_radii),
        square_radii=_parse_radii(args.square_radii),
        tol=args.tol,
    )
    out = []
    for row in rows:
        out.append(
            make_row(
                walk="path-srw" if row["kind"] == "path" else "lsrw",
                shape=row["kind"], radius=row["radius"], n=row["n"],
                method="column_solve", value=row["trace"], tol=args.tol,
                runtime_ms=_maybe_runtime(args, started),
                notes=f"ratio={row['ratio']!r};normalizer={row['normalizer']}",
            )
        )
    return out


# -- parser ----------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="latzeta", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, walk=True):
        p.add_argument("--out", choices=("csv", "json"), default="csv")
        p.add_argument("--output", help="write to a file instead of stdout")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=1e-10)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--timings", action="store_true",
                       help="fill the runtime_ms column (breaks byte-stable reruns)")
        p.add_argument("--config", help="key=value file overriding flags")
        if walk:
            p.add_argument("--walk", choices=BUILTIN_NAMES, default="lsrw")
            p.add_argument("--laziness", type=float, default=None)

    p = sub.add_parser("zeta", help="trace of the inverse generator on one domain")
    common(p)
    p.add_argument("--R", type=int, required=True)
    p.add_argument("--shape", choices=("square", "ball"), default="square")
    p.add_argument("--method", choices=("dense", "exact", "hutchinson"), default="exact")
    p.add_argument("--probes", type=int, default=64)
    p.add_argument("--dense-cap", type=int, default=spectra.DENSE_CAP)
    p.add_argument("--env-seed", type=int, default=None,
                   help="use a sampled conductance environment instead of a walk")
    p.add_argument("--env-c1", type=float, default=0.5)
    p.add_argument("--env-c2", type=float, default=2.0)
    p.add_argument("--dump-operator", metavar="FILE",
                   help="also write the generator in coordinate text format")
    p.set_defaults(func=cmd_zeta)

    p = sub.add_parser("pi", help="pi identity evaluated at one size")
    common(p)
    p.add_argument("--R", type=int, required=True)
    p.add_argument("--method", choices=("dense", "exact"), default="exact")
    p.set_defaults(func=cmd_pi)

    p = sub.add_parser("fit-g", help="leading-constant regression over sizes")
    common(p)
    p.add_argument("--radii", default="20:100:10",
                   help="comma list and/or start:stop:step ranges")
    p.add_argument("--shape", choices=("square", "ball"), default="square")
    p.add_argument("--method", choices=("dense", "exact"), default="exact")
    p.set_defaults(func=cmd_fit_g)

    p = sub.add_parser("ledger", help="error bookkeeping rows for one square")
    common(p)
    p.add_argument("--R", type=int, required=True)
    p.add_argument("--eta", type=float, default=0.25)
    p.set_defaults(func=cmd_ledger)

    p = sub.add_parser("heat-constant", help="exact return series and plateau fit")
    common(p)
    p.add_argument("--tmax", type=int, default=2000)
    p.add_argument("--origin", default="0,0")
    p.add_argument("--t-min", type=int, default=16)
    p.add_argument("--strategy", choices=("auto", "direct", "split"), default="auto")
    p.add_argument("--window-cap", type=int, default=kernels.DEFAULT_WINDOW_CAP)
    p.set_defaults(func=cmd_heat_constant)

    p = sub.add_parser("kirchhoff", help="resistance-sum vs spectral identities")
    common(p, walk=False)
    p.add_argument("--graph", choices=("k2", "p3", "cycle", "random"), default="k2")
    p.add_argument("--n", type=int, default=10)
    p.set_defaults(func=cmd_kirchhoff)

    p = sub.add_parser("dimension", help="trace growth across effective dimensions")
    common(p, walk=False)
    p.add_argument("--path-radii", default="2,50,100,200")
    p.add_argument("--square-radii", default="20,40")
    p.set_defaults(func=cmd_dimension)

    return parser


def _apply_config(args) -> None:
    if not getattr(args, "config", None):
        return
    with open(args.config) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"bad config line {line!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if not hasattr(args, key):
                raise UsageError(f"unknown config key {key!r}")
            current = getattr(args, key)
            if isinstance(current, bool):
                value = value.lower() in ("1", "true", "yes", "on")
            elif isinstance(current, int):
                value = int(value)
            elif isinstance(current, float):
                value = float(value)
            setattr(args, key, value)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _apply_config(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    try:
        if args.command == "heat-constant":
            rows, extra = cmd_heat_constant(args)
            _emit(args, _metadata(args, tmax=args.tmax, origin=args.origin, **extra),
                  rows, columns=["t", "p_t", "t_p_t"])
        else:
            rows = args.func(args)
            _emit(args, _metadata(args), rows)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except MemoryError:
        print("numerical failure: out of memory", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
