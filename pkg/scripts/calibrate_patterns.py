#!/usr/bin/env python3
"""Calibration sweeps behind the frozen benchmark geometries.

The reference experiments describe several coefficient patterns only
through figures, so the generators in nosas.mesh carry calibrated
constants.  This script regenerates the evidence for each frozen choice:

1. channel vertical offset: sweep integer cell offsets of the h-wide
   channel inside its hosting subdomain and compare the floating
   subdomain's spectrum against the published (0, 0.1548, 0.2500) row;
2. channel offset for the iteration/condition table: sweep the offset on
   the full mesh and compare the minimum-energy variant's measured
   condition number against the published 12-cell grid (the two tables
   pin *different* offsets: H/4 for the spectra, 3 cells above the
   midline for the solver table);
3. comb / string motifs: report the frozen motifs' spectra against the
   published rows with their acceptance bands.

Run from the repository root:  python scripts/calibrate_patterns.py
"""

import numpy as np

from nosas import (
    CoefficientField,
    CoarseKind,
    PatternSpec,
    assemble_global,
    assemble_subdomain,
    build_mesh,
    build_partition,
    build_preconditioner,
    dense_schur,
    generalized_symmetric_eigen,
    generate_coefficients,
    pcg,
)


def channel_spectrum_sweep():
    print("== channel offset vs floating-subdomain spectrum (H/h = 8) ==")
    print("   published row: lambda_2 = 0.1548, lambda_3 = 0.2500")
    mesh = build_mesh(4, 8)
    part = build_partition(mesh)
    n = mesh.cells_per_side
    for off in range(8):
        cells = np.full((n, n), 1.0)
        cells[2 * 8 + off, :] = 1e6
        coeffs = CoefficientField(rho=np.repeat(cells.ravel(), 2), pattern_tag="sweep")
        sm = assemble_subdomain(mesh, coeffs, part, 9)
        vals = generalized_symmetric_eigen(dense_schur(sm), sm.a_gg).values
        mark = "  <-- H/4 offset (frozen default)" if off == 2 else ""
        print(f"   offset {off}: lambda_2 = {vals[1]:.4f}  lambda_3 = {vals[2]:.4f}{mark}")
    print()


def mes_cond(sps, m, offset):
    mesh = build_mesh(sps, m)
    part = build_partition(mesh)
    coeffs = generate_coefficients(
        mesh, PatternSpec(variant="channel", channel_offset=offset))
    system = assemble_global(mesh, coeffs, part)
    p = build_preconditioner(system, mesh, coeffs, part, CoarseKind("mes"))
    _, rep = pcg(lambda v: system.a @ v, p.apply, system.b, rtol=1e-6, max_iter=800)
    return rep.iterations, rep.cond_estimate


def channel_solver_sweep():
    print("== channel offset vs minimum-energy solver table (H = 1/4) ==")
    targets = {4: (23, 9.39), 8: (31, 16.31), 16: (56, 51.38)}
    for m, (tit, tc) in targets.items():
        print(f"   H/h = {m}, published {tit} iterations / cond {tc}:")
        for off in sorted({1, 2, 3, m // 4, m // 2}):
            it, c = mes_cond(4, m, off)
            mark = "  <-- frozen for the solver table" if off == 3 else ""
            print(f"     offset {off:2d}: {it:3d} iterations, cond {c:7.3f}{mark}")
    print("   -> offset 3 reproduces every cell; the spectra table instead")
    print("      pins offset H/4.  Both offsets are kept (pattern parameter).")
    print()


def comb_string_report():
    print("== frozen comb motif vs published spectra (ratio 1e6) ==")
    mesh = build_mesh(2, 16)
    part = build_partition(mesh)
    coeffs = generate_coefficients(mesh, PatternSpec(variant="comb"))
    rows = {
        3: ("comb subdomain #1", [(2.14e-7, "x3"), (1.68e-6, "x3"), (0.0907, "10%")]),
        2: ("comb subdomain #2", [(8.71e-7, "x3"), (0.0594, "10%")]),
    }
    for sub, (label, targets) in rows.items():
        sm = assemble_subdomain(mesh, coeffs, part, sub)
        vals = generalized_symmetric_eigen(dense_schur(sm), sm.a_gg).values
        measured = ", ".join(
            f"{vals[j]:.3g} (target {t:g}, band {band})"
            for j, (t, band) in enumerate(targets))
        print(f"   {label}: {measured}")

    print("== frozen string motifs vs published spectra (ratio 1e12) ==")
    mesh = build_mesh(3, 8)
    part = build_partition(mesh)
    for broken, label, targets in (
        (False, "connected", [(0.0, "0"), (0.2000, "10%")]),
        (True, "broken", [(0.0, "0"), (1.24e-11, "x3"), (1.51e-11, "x3"), (0.3072, "10%")]),
    ):
        coeffs = generate_coefficients(
            mesh, PatternSpec(variant="string", high_value=1e12, broken=broken))
        sm = assemble_subdomain(mesh, coeffs, part, 4)
        vals = generalized_symmetric_eigen(dense_schur(sm), sm.a_gg).values
        measured = ", ".join(
            f"{vals[j]:.3g} (target {t:g}, band {band})"
            for j, (t, band) in enumerate(targets))
        print(f"   string {label}: {measured}")
    print()


if __name__ == "__main__":
    channel_spectrum_sweep()
    channel_solver_sweep()
    comb_string_report()
