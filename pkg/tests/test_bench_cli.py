import json

import numpy as np
import pytest

from nosas import InvalidParameterError, PatternSpec
from nosas.bench import (
    ExperimentConfig,
    ExperimentReport,
    dump_spectrum,
    island_summary,
    reproduce_table,
    run_experiment,
)
from nosas.cli import main


def small_config(**kw):
    defaults = dict(subdomains_per_side=2, cells_per_subdomain_side=4,
                    pattern=PatternSpec(variant="constant"), kind_name="nosas_exact",
                    c=0.5, max_iter=200)
    defaults.update(kw)
    return ExperimentConfig(**defaults)


def test_config_validation():
    with pytest.raises(InvalidParameterError):
        small_config(rtol=2.0)
    with pytest.raises(InvalidParameterError):
        small_config(kind_name="nope")
    with pytest.raises(InvalidParameterError):
        small_config(subdomains_per_side=0)


def test_report_round_trip_and_determinism(tmp_path):
    out = tmp_path / "report.json"
    config = small_config(out_path=str(out))
    rep1 = run_experiment(config)
    rep2 = run_experiment(small_config())
    assert out.exists()
    parsed = ExperimentReport.from_json(out.read_text())
    assert parsed.iterations == rep1.iterations
    assert parsed.cond_estimate == rep1.cond_estimate
    # deterministic modulo timings
    assert rep1.iterations == rep2.iterations
    assert rep1.cond_estimate == rep2.cond_estimate
    assert rep1.coarse_ranks == rep2.coarse_ranks
    assert all(v > 0 for v in rep1.timings.values())
    assert rep1.converged


def test_report_contains_bound_fields():
    rep = run_experiment(small_config(verify=True))
    assert rep.verify_cond is not None
    assert rep.bound["measured_cond"] <= rep.bound["theoretical_upper"] * 1.01
    assert rep.n_coarse == sum(rep.coarse_ranks)


def test_report_optional_spectra_round_trip():
    rep = run_experiment(small_config(include_spectra=True))
    assert rep.spectra is not None and len(rep.spectra) == 4
    back = ExperimentReport.from_json(rep.to_json())
    assert back.spectra == rep.spectra
    assert run_experiment(small_config()).spectra is None


def test_spectrum_single_subdomain_header_only():
    config = small_config(subdomains_per_side=1)
    text = dump_spectrum(config)
    lines = text.strip().splitlines()
    assert lines[0].startswith("class,index")
    assert len(lines) == 1


def test_spectrum_selector_out_of_range():
    with pytest.raises(InvalidParameterError):
        dump_spectrum(small_config(), selector="99")
    with pytest.raises(InvalidParameterError):
        dump_spectrum(small_config(), selector="bogus")


def test_spectrum_threshold_presets():
    """Constant coefficients at H/h = 8: the published threshold constants
    select 1/1/4 eigenvalues per floating subdomain (exact) and the scaled
    constants reproduce that for the diagonal surrogate."""
    config = ExperimentConfig(3, 8, pattern=PatternSpec(variant="constant"))
    text = dump_spectrum(config, selector="floating")
    rows = [line.split(",") for line in text.strip().splitlines()[1:]]
    exact = np.array([float(r[2]) for r in rows])
    inexact = np.array([float(r[4]) for r in rows])
    m = 8
    for c, keep in ((0.5, 1), (1.3, 1), (3.2, 4)):
        assert int((exact < c / m).sum()) == keep, c
    for c, keep in ((0.25, 1), (0.64, 1), (1.6, 4)):
        assert int((inexact < c / m).sum()) == keep, c


def test_island_summary_matches():
    config = ExperimentConfig(4, 8, pattern=PatternSpec(variant="inclusion_grid"))
    rows = island_summary(config, high_cut=1e3, rho1=1e6, rho2=1.0)
    assert all(r["match"] for r in rows)
    by_sub = {r["subdomain"]: r["predicted_small"] for r in rows}
    assert by_sub[5] == 8 and by_sub[1] == 5 and by_sub[0] == 3


def test_reproduce_table_unknown_id():
    with pytest.raises(InvalidParameterError):
        reproduce_table("T9")


def test_table7_without_raster_is_a_note():
    result = reproduce_table("T7")
    assert result.passed
    assert result.cells == []
    assert "raster" in result.notes[0]


def test_table7_with_synthetic_raster(tmp_path):
    rng = np.random.default_rng(0)
    n = 16  # 2 subdomains x 8 cells
    rows = ["," .join(f"{10 ** rng.uniform(0, 3):.6g}" for _ in range(n)) for _ in range(n)]
    raster = tmp_path / "perm.csv"
    raster.write_text("\n".join(rows) + "\n")
    result = reproduce_table("T7", raster_path=str(raster),
                             subdomains_per_side=2, cells_per_subdomain_side=8)
    assert result.passed
    assert len(result.cells) == 9  # 3 thresholds x (iters, cond, coarse size)
    assert all(c.mode == "info" for c in result.cells)


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


def test_cli_run_writes_report(tmp_path, capsys):
    out = tmp_path / "r.json"
    code = main(["run", "--subdomains", "2", "--cells", "4", "--pattern", "constant",
                 "--kind", "nosas_exact", "--c", "0.5", "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text())
    assert report["schema"] == "nosas-report/1"
    assert report["converged"]


def test_cli_missing_mesh_args_is_config_error(capsys):
    assert main(["run", "--pattern", "constant"]) == 2


def test_cli_bad_pattern_geometry_is_config_error(capsys):
    assert main(["run", "--subdomains", "3", "--cells", "8", "--pattern", "channel"]) == 2


def test_cli_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("subdomains=2\ncells=4\npattern=constant\nc=0.5\n")
    out = tmp_path / "r.json"
    code = main(["run", "--config", str(cfg), "--cells", "8", "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text())
    assert report["config"]["cells_per_subdomain_side"] == 8
    assert report["config"]["subdomains_per_side"] == 2


def test_cli_json_config(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"subdomains": 2, "cells": 4, "pattern": "constant"}))
    code = main(["run", "--config", str(cfg)])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["converged"]


def test_cli_spectrum_to_file(tmp_path, capsys):
    out = tmp_path / "spec.csv"
    code = main(["spectrum", "--subdomains", "2", "--cells", "4",
                 "--pattern", "constant", "--selector", "corner", "--out", str(out)])
    assert code == 0
    assert out.read_text().startswith("class,index")


def test_cli_unknown_table_is_config_error(capsys):
    assert main(["table", "T99"]) == 2


def test_cli_table7_without_raster(capsys):
    assert main(["table", "T7"]) == 0
    assert "raster" in capsys.readouterr().out


def test_cli_islands_comb(capsys):
    code = main(["islands", "--subdomains", "2", "--cells", "16", "--pattern", "comb"])
    assert code == 0
    rows = json.loads(capsys.readouterr().out)
    assert all(r["match"] for r in rows)


def test_cli_raster_run(tmp_path, capsys):
    raster = tmp_path / "grid.csv"
    n = 8
    raster.write_text("\n".join(",".join("1" for _ in range(n)) for _ in range(n)) + "\n")
    code = main(["run", "--subdomains", "2", "--cells", "4", "--raster", str(raster),
                 "--kind", "mes"])
    assert code == 0


def test_cli_missing_raster_file(capsys):
    assert main(["run", "--subdomains", "2", "--cells", "4",
                 "--raster", "/nonexistent.csv"]) == 2
