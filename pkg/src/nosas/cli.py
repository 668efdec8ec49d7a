"""Command-line benchmark front end.

Subcommands: ``run`` (one experiment -> JSON report), ``spectrum``
(per-class eigenvalue CSV), ``table`` (reproduce a published table),
``islands`` (island counts vs eigenvalue clusters).  Flags override values
from an optional config file (JSON object or ``key=value`` lines).  Set
``NOSAS_THREADS`` to bound the BLAS thread count.  Exit codes: 0 ok,
1 numerical error or failed table check, 2 configuration error.
"""

import argparse
import json
import os
import sys


def _apply_thread_env():
    threads = os.environ.get("NOSAS_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)


_apply_thread_env()

from . import bench
from .coarse import KIND_NAMES, NumericalBreakdownError
from .linalg import DivergenceError, NotSpdError
from .mesh import InvalidParameterError, PatternSpec, RasterFormatError

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2

_PATTERNS = ("constant", "channel", "comb", "string", "inclusion_grid",
             "dual_stripe", "added_channels")


def _load_config_file(path):
    with open(path) as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return json.loads(text)
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InvalidParameterError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, val = line.split("=", 1)
        values[key.strip()] = val.strip()
    return values


def _mesh_pattern_args(p, pattern_required=True):
    p.add_argument("--subdomains", type=int, help="subdomains per side (1/H)")
    p.add_argument("--cells", type=int, help="cells per subdomain side (H/h)")
    p.add_argument("--pattern", choices=_PATTERNS, help="coefficient pattern")
    p.add_argument("--high", type=float, help="high coefficient value")
    p.add_argument("--low", type=float, help="low coefficient value")
    p.add_argument("--extra", type=float, help="extra-channel coefficient value")
    p.add_argument("--channels", type=int, help="number of extra channels")
    p.add_argument("--channel-offset", type=int, dest="channel_offset",
                   help="channel offset in cells above the hosting interface")
    p.add_argument("--broken", action="store_true", default=None,
                   help="use the broken (three-piece) string variant")
    p.add_argument("--raster", help="coefficient raster CSV (overrides --pattern)")
    p.add_argument("--config", help="config file (JSON or key=value), flags override")


def _build_parser():
    parser = argparse.ArgumentParser(prog="nosas",
                                     description="Non-overlapping additive Schwarz benchmark")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment and emit a JSON report")
    _mesh_pattern_args(run)
    run.add_argument("--kind", choices=KIND_NAMES, help="preconditioner variant")
    run.add_argument("--c", type=float, dest="c", help="threshold constant (eta = c*h/H)")
    run.add_argument("--rtol", type=float, help="PCG relative residual tolerance")
    run.add_argument("--max-iter", type=int, dest="max_iter", help="PCG iteration cap")
    run.add_argument("--verify", action="store_true", default=None,
                     help="dense verify mode for small systems")
    run.add_argument("--include-spectra", action="store_true", default=None,
                     dest="include_spectra",
                     help="embed per-subdomain eigenvalue lists in the report")
    run.add_argument("--out", help="report output path (JSON)")

    spec = sub.add_parser("spectrum", help="dump per-class generalized eigenvalues as CSV")
    _mesh_pattern_args(spec)
    spec.add_argument("--kind", choices=KIND_NAMES, help="inexact variant for the right column")
    spec.add_argument("--c", type=float, dest="c")
    spec.add_argument("--selector", default="all",
                      help="corner | edge | floating | all | subdomain index")
    spec.add_argument("--out", help="CSV output path (default stdout)")

    tab = sub.add_parser("table", help="reproduce a published table and check tolerances")
    tab.add_argument("table_id", help="T1..T7")
    tab.add_argument("--raster", help="coefficient raster CSV (T7)")
    tab.add_argument("--subdomains", type=int, default=4, help="mesh for T7 raster runs")
    tab.add_argument("--cells", type=int, default=8)
    tab.add_argument("--out", help="write the formatted table to this path")

    isl = sub.add_parser("islands", help="count high-coefficient islands per subdomain")
    _mesh_pattern_args(isl)
    isl.add_argument("--high-cut", type=float, dest="high_cut",
                     help="classification threshold (default sqrt(high*low))")
    isl.add_argument("--out", help="JSON output path (default stdout)")
    return parser


_CONFIG_TYPES = {
    "subdomains": int, "cells": int, "high": float, "low": float,
    "extra": float, "channels": int, "channel_offset": int, "broken": bool,
    "c": float, "rtol": float, "max_iter": int, "verify": bool,
    "high_cut": float, "include_spectra": bool,
}


def _merge(args, key, default=None):
    val = getattr(args, key, None)
    if val is not None:
        return val
    cfg = getattr(args, "_config_values", {})
    if key in cfg:
        raw = cfg[key]
        typ = _CONFIG_TYPES.get(key)
        if typ is bool and isinstance(raw, str):
            return raw.lower() in ("1", "true", "yes", "on")
        return typ(raw) if typ and isinstance(raw, str) else raw
    return default


def _pattern_from_args(args):
    kwargs = {"variant": _merge(args, "pattern", "constant")}
    for attr, key in (("high_value", "high"), ("low_value", "low"),
                      ("extra_value", "extra"), ("channels", "channels"),
                      ("channel_offset", "channel_offset"), ("broken", "broken")):
        val = _merge(args, key)
        if val is not None:
            kwargs[attr] = val
    return PatternSpec(**kwargs)


def _experiment_config(args, kind_default="nosas_exact"):
    sps = _merge(args, "subdomains")
    cells = _merge(args, "cells")
    if sps is None or cells is None:
        raise InvalidParameterError("--subdomains and --cells are required")
    return bench.ExperimentConfig(
        subdomains_per_side=sps,
        cells_per_subdomain_side=cells,
        pattern=_pattern_from_args(args),
        kind_name=_merge(args, "kind", kind_default),
        c=_merge(args, "c", 0.25),
        rtol=_merge(args, "rtol", 1e-6),
        max_iter=_merge(args, "max_iter", 1000),
        verify=bool(_merge(args, "verify", False)),
        include_spectra=bool(_merge(args, "include_spectra", False)),
        raster_path=_merge(args, "raster"),
        out_path=getattr(args, "out", None),
    )


def _emit(text, out_path):
    if out_path:
        tmp = out_path + ".tmp"
        with open(tmp, "w") as fh:
            fh.write(text)
        os.replace(tmp, out_path)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg_path = getattr(args, "config", None)
        args._config_values = _load_config_file(cfg_path) if cfg_path else {}
    except (OSError, json.JSONDecodeError, InvalidParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "run":
            config = _experiment_config(args)
            report = bench.run_experiment(config)
            if not config.out_path:
                print(report.to_json())
            else:
                print(f"report written to {config.out_path}")
            return EXIT_OK

        if args.command == "spectrum":
            config = _experiment_config(args, kind_default="nosas_diagonal")
            csv_text = bench.dump_spectrum(config, args.selector)
            _emit(csv_text, args.out)
            return EXIT_OK

        if args.command == "table":
            result = bench.reproduce_table(args.table_id, raster_path=args.raster,
                                           subdomains_per_side=args.subdomains,
                                           cells_per_subdomain_side=args.cells)
            _emit(result.format(), args.out)
            return EXIT_OK if result.passed else EXIT_NUMERICAL

        if args.command == "islands":
            config = _experiment_config(args)
            pattern = config.pattern
            high_cut = _merge(args, "high_cut")
            if high_cut is None:
                high_cut = (pattern.high_value * pattern.low_value) ** 0.5
            rows = bench.island_summary(config, high_cut,
                                        rho1=pattern.high_value, rho2=pattern.low_value)
            _emit(json.dumps(rows, indent=2), args.out)
            return EXIT_OK if all(r["match"] for r in rows) else EXIT_NUMERICAL
    except (InvalidParameterError, RasterFormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NotSpdError, NumericalBreakdownError, DivergenceError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
