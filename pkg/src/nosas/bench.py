"""Experiment harness: configured runs, spectrum dumps, table reproduction.

One experiment is one full pipeline execution (mesh -> coefficients ->
partition -> system -> preconditioner -> PCG) with phase timings and a
JSON-serializable report.  Table runners re-measure the published
experiment grids and compare cell by cell against the stored references.
"""

import csv
import io
import json
import math
import os
import time
from dataclasses import asdict, dataclass, field

from . import reference_tables as refs
from .coarse import CoarseKind, KIND_NAMES
from .linalg import pcg
from .mesh import (
    InvalidParameterError,
    PatternSpec,
    build_mesh,
    generate_coefficients,
    load_coefficient_grid,
)
from .partition import build_partition
from .assembly import assemble_global
from .precond import VERIFY_MODE_CAP, bound_report, build_preconditioner, preconditioned_spectrum
from .islands import find_islands, observed_small_count
from .linalg import dense_schur, generalized_symmetric_eigen
from .assembly import assemble_subdomain

__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "run_experiment",
    "dump_spectrum",
    "reproduce_table",
    "TableResult",
    "island_summary",
]

REPORT_SCHEMA = "nosas-report/1"


@dataclass
class ExperimentConfig:
    """Full description of one benchmark run."""

    subdomains_per_side: int
    cells_per_subdomain_side: int
    pattern: PatternSpec = field(default_factory=lambda: PatternSpec(variant="constant"))
    kind_name: str = "nosas_exact"
    c: float = 0.25
    rtol: float = 1e-6
    max_iter: int = 1000
    verify: bool = False
    include_spectra: bool = False
    raster_path: str | None = None
    out_path: str | None = None

    def __post_init__(self):
        if not (0.0 < self.rtol < 1.0):
            raise InvalidParameterError(f"rtol must lie in (0, 1), got {self.rtol}")
        if self.subdomains_per_side < 1 or self.cells_per_subdomain_side < 1 or self.max_iter < 1:
            raise InvalidParameterError("sizes and max_iter must be >= 1")
        if self.kind_name not in KIND_NAMES:
            raise InvalidParameterError(
                f"unknown kind {self.kind_name!r}; expected one of {KIND_NAMES}"
            )

    @property
    def kind(self) -> CoarseKind:
        return CoarseKind(self.kind_name, c=self.c)

    def to_dict(self):
        d = asdict(self)
        d["pattern"] = asdict(self.pattern)
        return d


@dataclass
class ExperimentReport:
    """Machine-readable result of one run (losslessly serializable)."""

    schema: str
    config: dict
    n_free: int
    n_gamma: int
    n_subdomains: int
    iterations: int
    converged: bool
    cond_estimate: float
    verify_cond: float | None
    n_coarse: int
    coarse_ranks: list
    bound: dict
    timings: dict
    final_relative_residual: float
    spectra: list | None = None   # per-subdomain eigenvalues (spectral kinds)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, allow_nan=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        return cls(**json.loads(text))


def _write_atomic(path: str, text: str):
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _build_problem(config: ExperimentConfig):
    mesh = build_mesh(config.subdomains_per_side, config.cells_per_subdomain_side)
    if config.raster_path is not None:
        with open(config.raster_path) as fh:
            coeffs = load_coefficient_grid(fh, mesh)
    else:
        coeffs = generate_coefficients(mesh, config.pattern)
    partition = build_partition(mesh)
    return mesh, coeffs, partition


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Execute the full pipeline and optionally write the report atomically."""
    timings = {}
    t0 = time.perf_counter()
    mesh, coeffs, partition = _build_problem(config)
    system = assemble_global(mesh, coeffs, partition)
    timings["assembly_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    precond = build_preconditioner(system, mesh, coeffs, partition, config.kind)
    timings["setup_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    _, rep = pcg(lambda v: system.a @ v, precond.apply, system.b,
                 rtol=config.rtol, max_iter=config.max_iter)
    timings["pcg_s"] = time.perf_counter() - t0

    verify_cond = None
    if config.verify and system.n_free <= VERIFY_MODE_CAP:
        t0 = time.perf_counter()
        spec = preconditioned_spectrum(precond, system)
        verify_cond = float(spec[-1] / spec[0])
        timings["verify_s"] = time.perf_counter() - t0

    spectra = None
    if config.include_spectra and precond.bases is not None:
        spectra = [basis.spectrum.tolist() for basis in precond.bases]

    bound = bound_report(precond, system, pcg_cond=rep.cond_estimate)
    report = ExperimentReport(
        schema=REPORT_SCHEMA,
        config=config.to_dict(),
        n_free=partition.n_free,
        n_gamma=partition.n_gamma,
        n_subdomains=partition.n_subdomains,
        iterations=rep.iterations,
        converged=rep.converged,
        cond_estimate=rep.cond_estimate,
        verify_cond=verify_cond,
        n_coarse=precond.n_coarse,
        coarse_ranks=precond.coarse_ranks,
        bound={
            "lambda_min_eta": bound.lambda_min_eta,
            "theoretical_upper": bound.theoretical_upper,
            "measured_cond": bound.measured_cond,
            "lambda_max_bound": bound.lambda_max_bound,
        },
        timings=timings,
        final_relative_residual=rep.residuals[-1] if rep.residuals else 0.0,
        spectra=spectra,
    )
    if config.out_path:
        _write_atomic(config.out_path, report.to_json())
    return report


def _subdomain_classes(partition, sps):
    """Representative subdomain per class present in the mesh."""
    classes = {}
    for i in range(partition.n_subdomains):
        sy, sx = divmod(i, sps)
        on = (sx in (0, sps - 1)) + (sy in (0, sps - 1))
        label = "corner" if on == 2 else "edge" if on == 1 else "floating"
        classes.setdefault(label, i)
    return classes


def dump_spectrum(config: ExperimentConfig, selector: str = "all") -> str:
    """CSV of (class, index, lambda, log10) for exact and inexact eigenproblems.

    ``selector`` is one of corner/edge/floating/all or a subdomain index.
    The exact spectrum and the inexact one for the configured kind (the
    diagonal surrogate unless block-diagonal is chosen) are listed side by
    side, matching the threshold-picking plots.
    """
    mesh, coeffs, partition = _build_problem(config)
    classes = _subdomain_classes(partition, config.subdomains_per_side)
    if selector == "all":
        chosen = sorted(classes.items(), key=lambda kv: kv[1])
    elif selector in classes:
        chosen = [(selector, classes[selector])]
    else:
        try:
            idx = int(selector)
        except ValueError:
            raise InvalidParameterError(
                f"unknown spectrum selector {selector!r}; expected corner/edge/floating/all "
                f"or a subdomain index"
            ) from None
        if not (0 <= idx < partition.n_subdomains):
            raise InvalidParameterError(
                f"subdomain index {idx} out of range 0..{partition.n_subdomains - 1}"
            )
        chosen = [(f"subdomain{idx}", idx)]

    inexact_kind = (config.kind if config.kind.is_inexact
                    else CoarseKind("nosas_diagonal", c=config.c))
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["class", "index", "lambda_exact", "log10_exact",
                     "lambda_inexact", "log10_inexact"])
    from .coarse import inexact_interface_matrix, interface_groups

    for label, i in chosen:
        if partition.gamma_i[i].size == 0:
            continue
        sm = assemble_subdomain(mesh, coeffs, partition, i)
        s_mat = dense_schur(sm)
        exact = generalized_symmetric_eigen(s_mat, sm.a_gg).values
        groups = interface_groups(mesh, partition, i)
        ahat = inexact_interface_matrix(sm.a_gg, inexact_kind, groups)
        inexact = generalized_symmetric_eigen(s_mat, ahat).values
        for j, (le, li) in enumerate(zip(exact, inexact)):
            writer.writerow([
                label, j,
                f"{le:.12g}", f"{math.log10(le):.6f}" if le > 0 else "-inf",
                f"{li:.12g}", f"{math.log10(li):.6f}" if li > 0 else "-inf",
            ])
    return buf.getvalue()


def island_summary(config: ExperimentConfig, high_cut: float, rho1: float, rho2: float):
    """Per-subdomain island counts against the eigenvalue-cluster count."""
    mesh, coeffs, partition = _build_problem(config)
    rows = []
    for i in range(partition.n_subdomains):
        if partition.gamma_i[i].size == 0:
            continue
        rep = find_islands(mesh, coeffs, partition, i, high_cut)
        sm = assemble_subdomain(mesh, coeffs, partition, i)
        values = generalized_symmetric_eigen(dense_schur(sm), sm.a_gg).values
        observed = observed_small_count(values, rho1, rho2)
        rows.append({
            "subdomain": i,
            "islands": len(rep.islands),
            "predicted_small": rep.predicted_small,
            "observed_small": observed,
            "match": rep.predicted_small == observed,
        })
    return rows


# ---------------------------------------------------------------------------
# Table reproduction
# ---------------------------------------------------------------------------


@dataclass
class TableCell:
    label: str
    measured: float
    reference: float | None
    mode: str          # iters | cond | eig | eig_small | zero | count | info | qualitative
    tolerance: float | None
    passed: bool | None   # None for informational cells

    def deviation(self):
        if self.reference in (None, 0) or self.measured is None:
            return None
        return self.measured / self.reference - 1.0


@dataclass
class TableResult:
    table_id: str
    cells: list
    notes: list

    @property
    def passed(self) -> bool:
        return all(c.passed is not False for c in self.cells)

    def format(self) -> str:
        lines = [f"Table {self.table_id}:"]
        for c in self.cells:
            status = "----" if c.passed is None else ("PASS" if c.passed else "FAIL")
            dev = c.deviation()
            devtxt = f" ({dev:+.1%})" if dev is not None and c.mode != "count" else ""
            ref = "n/a" if c.reference is None else f"{c.reference:g}"
            lines.append(f"  [{status}] {c.label}: measured {c.measured:g} vs {ref}{devtxt}")
        for n in self.notes:
            lines.append(f"  note: {n}")
        lines.append(f"  => {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def _check(mode, measured, reference, tol):
    if mode == "info":
        return None
    if mode == "zero":
        return abs(measured) <= tol
    if mode == "count":
        return int(round(measured)) == int(reference)
    if mode == "iters":
        return abs(measured - reference) <= tol * reference + 0.5
    if mode == "eig_small":
        return measured > 0 and (1.0 / tol) <= measured / reference <= tol
    return abs(measured - reference) <= tol * abs(reference)


def _cell(label, measured, reference, mode, tol):
    return TableCell(label, float(measured), reference, mode, tol,
                     _check(mode, measured, reference, tol))


def _subdomain_spectrum(mesh, coeffs, partition, i, kind=None):
    sm = assemble_subdomain(mesh, coeffs, partition, i)
    s_mat = dense_schur(sm)
    if kind is None or not kind.is_inexact:
        b = sm.a_gg
    else:
        from .coarse import inexact_interface_matrix, interface_groups
        b = inexact_interface_matrix(sm.a_gg, kind, interface_groups(mesh, partition, i))
    return generalized_symmetric_eigen(s_mat, b).values


def _run(sps, m, pattern, kind_name, c, max_iter=2000):
    config = ExperimentConfig(sps, m, pattern=pattern, kind_name=kind_name, c=c,
                              max_iter=max_iter)
    return run_experiment(config)


def _table1():
    cells = []
    mesh = build_mesh(2, 16)
    partition = build_partition(mesh)
    coeffs = generate_coefficients(mesh, PatternSpec(variant="comb"))
    for row, sub in (("comb#1", 3), ("comb#2", 2)):
        values = _subdomain_spectrum(mesh, coeffs, partition, sub)
        for j, (ref, mode, tol) in enumerate(refs.TABLE1[row]):
            cells.append(_cell(f"{row} lambda{j + 1}", values[j], ref, mode, tol))
    mesh = build_mesh(3, 8)
    partition = build_partition(mesh)
    for row, broken in (("string#1", False), ("string#2", True)):
        coeffs = generate_coefficients(
            mesh, PatternSpec(variant="string", high_value=1e12, broken=broken))
        values = _subdomain_spectrum(mesh, coeffs, partition, 4)
        for j, (ref, mode, tol) in enumerate(refs.TABLE1[row]):
            cells.append(_cell(f"{row} lambda{j + 1}", values[j], ref, mode, tol))
    notes = ["small eigenvalues: factor-3 band; first O(1) eigenvalue: 10% "
             "(figure-derived geometry); later eigenvalues informational"]
    return TableResult("T1", cells, notes)


def _table2():
    cells = []
    for m, per_kind in refs.TABLE2.items():
        mesh = build_mesh(4, m)
        partition = build_partition(mesh)
        coeffs = generate_coefficients(mesh, PatternSpec(variant="channel"))
        sub = 2 * 4 + 1  # floating subdomain crossed by the channel
        for kname, ref_row in per_kind.items():
            kind = None if kname == "exact" else CoarseKind("nosas_diagonal")
            values = _subdomain_spectrum(mesh, coeffs, partition, sub, kind)
            measured = (values[0], values[1], values[2], values[-1])
            for label, mv, rv in zip(("lambda1", "lambda2", "lambda3", "lambda_max"),
                                     measured, ref_row):
                if rv == 0.0:
                    cells.append(_cell(f"m={m} {kname} {label}", mv, 0.0, "zero", 1e-10))
                else:
                    cells.append(_cell(f"m={m} {kname} {label}", mv, rv, "eig",
                                       refs.TABLE2_RTOL))
    return TableResult("T2", cells, [])


def _table3():
    cells = []
    for m, per_h in refs.TABLE3.items():
        for sps, (ref_it, ref_cond) in per_h.items():
            # channel three cells above the midline interface (see README on
            # the two calibrated channel offsets)
            pattern = PatternSpec(variant="channel", channel_offset=3)
            rep = _run(sps, m, pattern, "mes", 0.25)
            cells.append(_cell(f"m={m} H=1/{sps} iters", rep.iterations, ref_it,
                               "iters", refs.ITERS_RTOL))
            cells.append(_cell(f"m={m} H=1/{sps} cond", rep.cond_estimate, ref_cond,
                               "cond", refs.TABLE3_COND_RTOL[m]))
    # monotone growth of the condition number with N at fixed H/h
    notes = []
    for m, per_h in refs.TABLE3.items():
        conds = [c.measured for c in cells if c.label.startswith(f"m={m} ") and
                 c.label.endswith("cond")]
        mono = all(b >= a - 1e-9 for a, b in zip(conds, conds[1:]))
        cells.append(TableCell(f"m={m} growth with N", float(mono), 1.0,
                               "qualitative", None, bool(mono)))
    return TableResult("T3", cells, notes)


def _table4():
    cells = []
    for kind_name, per_m in refs.TABLE4.items():
        for m, per_h in per_m.items():
            conds = []
            for sps, (ref_it, ref_cond) in per_h.items():
                rep = _run(sps, m, PatternSpec(variant="inclusion_grid"), kind_name, 0.25)
                conds.append(rep.cond_estimate)
                tag = f"{kind_name} m={m} H=1/{sps}"
                cells.append(_cell(f"{tag} iters", rep.iterations, ref_it,
                                   "iters", refs.ITERS_RTOL))
                cells.append(_cell(f"{tag} cond", rep.cond_estimate, ref_cond,
                                   "cond", refs.TABLE4_COND_RTOL))
            sig3 = {float(f"{c:.3g}") for c in conds}
            cells.append(TableCell(f"{kind_name} m={m} H-independence",
                                   float(len(sig3) == 1), 1.0, "qualitative", None,
                                   len(sig3) == 1))
    return TableResult("T4", cells, [])


def _table5():
    cells = []
    for sps, (ref_it, ref_cond, ref_ne) in refs.TABLE5.items():
        rep = _run(sps, 8, PatternSpec(variant="dual_stripe"), "nosas_diagonal", 0.25)
        tag = f"H=1/{sps}"
        cells.append(_cell(f"{tag} coarse size", rep.n_coarse, ref_ne, "count", None))
        cells.append(_cell(f"{tag} cond", rep.cond_estimate, ref_cond, "cond",
                           refs.TABLE5_COND_RTOL))
        cells.append(_cell(f"{tag} iters", rep.iterations, ref_it, "iters",
                           refs.ITERS_RTOL))
    return TableResult("T5", cells, [])


def _table6():
    cells = []
    by_c = {}
    for c, per_n in refs.TABLE6.items():
        for nch, (ref_it, ref_cond, ref_ne) in per_n.items():
            pattern = PatternSpec(variant="added_channels", channels=nch)
            rep = _run(4, 16, pattern, "nosas_diagonal", c)
            tag = f"c={c} channels={nch}"
            if nch == 0:
                cells.append(_cell(f"{tag} coarse size", rep.n_coarse, ref_ne,
                                   "count", None))
                cells.append(_cell(f"{tag} cond", rep.cond_estimate, ref_cond,
                                   "cond", 0.10))
            else:
                cells.append(_cell(f"{tag} coarse size", rep.n_coarse, ref_ne,
                                   "info", None))
                cells.append(_cell(f"{tag} cond", rep.cond_estimate, ref_cond,
                                   "info", None))
            by_c.setdefault(nch, {})[c] = rep.cond_estimate
    for nch, conds in sorted(by_c.items()):
        if nch == 0:
            continue
        seq = [conds[c] for c in sorted(conds)]
        mono = all(b <= a + 1e-9 for a, b in zip(seq, seq[1:]))
        cells.append(TableCell(f"channels={nch} cond decreases with c",
                               float(mono), 1.0, "qualitative", None, bool(mono)))
    notes = ["extra-channel rows are stretch goals (placement not specified "
             "numerically); asserted cells: no-channel row and c-monotonicity"]
    return TableResult("T6", cells, notes)


def _table7(raster_path=None, sps=4, m=8):
    if raster_path is None:
        return TableResult("T7", [], [
            "requires a user-supplied coefficient raster (dataset not bundled); "
            "run `nosas table T7 --raster FILE [--subdomains N --cells M]`",
        ])
    cells = []
    for c in (0.25, 0.64, 1.60):
        config = ExperimentConfig(sps, m, kind_name="nosas_diagonal", c=c,
                                  raster_path=raster_path, max_iter=5000)
        rep = run_experiment(config)
        tag = f"c={c}"
        cells.append(_cell(f"{tag} iters", rep.iterations, None, "info", None))
        cells.append(_cell(f"{tag} cond", rep.cond_estimate, None, "info", None))
        cells.append(_cell(f"{tag} coarse size", rep.n_coarse, None, "info", None))
    return TableResult("T7", cells, [
        "user raster ingested; published rows correspond to specific "
        "permeability slices and are not asserted",
    ])


_TABLE_RUNNERS = {
    "T1": _table1, "T2": _table2, "T3": _table3, "T4": _table4,
    "T5": _table5, "T6": _table6, "T7": _table7,
}


def reproduce_table(table_id: str, raster_path: str | None = None,
                    subdomains_per_side: int = 4,
                    cells_per_subdomain_side: int = 8) -> TableResult:
    """Re-measure one published table and compare per cell."""
    tid = table_id.upper()
    if tid not in _TABLE_RUNNERS:
        raise InvalidParameterError(
            f"unknown table {table_id!r}; expected one of {sorted(_TABLE_RUNNERS)}"
        )
    if tid == "T7":
        return _table7(raster_path, subdomains_per_side, cells_per_subdomain_side)
    return _TABLE_RUNNERS[tid]()
