from __future__ import annotations

import json
import math

import numpy as np
import pytest

from mopo_squeeze.cli import main
from mopo_squeeze.tables import read_table


@pytest.fixture(autouse=True)
def isolated_cwd(monkeypatch, tmp_path):
    monkeypatch.chdir(tmp_path)


def _write_job(path, **values):
    path.write_text(json.dumps(values), encoding="utf-8")
    return str(path)


def test_fig2_table_and_plot(tmp_path):
    out = tmp_path / "figs"
    assert main(["figure", "fig2", "--out", str(out), "--points", "101"]) == 0
    table = read_table(out / "fig2.tsv")
    assert (out / "fig2.svg").is_file()
    assert table.metadata["figure"] == "fig2"
    assert table.metadata["lambda_s"] == "degenerate"
    assert table.metadata["omega_gvm"] == "unbounded"
    frame = table.frame
    assert list(frame.columns) == ["omega_over_gvs", "sigma_g1", "sigma_g1.2", "sigma_g1.4", "sigma_g1.5", "sigma_g1.55"]
    at_zero = frame.loc[frame["omega_over_gvs"] == 0.0, "sigma_g1"].iloc[0]
    assert at_zero == pytest.approx((1 - math.sin(1)) / (1 + math.sin(1)), rel=1e-9)


def test_fig2_is_deterministic(tmp_path):
    first = tmp_path / "a"
    second = tmp_path / "b"
    assert main(["figure", "fig2", "--out", str(first), "--points", "51", "--g", "1.2"]) == 0
    assert main(["figure", "fig2", "--out", str(second), "--points", "51", "--g", "1.2"]) == 0
    assert (first / "fig2.tsv").read_bytes() == (second / "fig2.tsv").read_bytes()


def test_fig3_normalised_copy(tmp_path):
    out = tmp_path / "figs"
    assert main(["figure", "fig3", "--out", str(out), "--points", "61", "--g", "1.0,1.5"]) == 0
    normalised = read_table(out / "fig3b.tsv").frame
    assert normalised["sigma_g1_norm"].max() == 1.0
    anti = read_table(out / "fig3.tsv").frame
    assert anti.loc[anti["omega_over_gvs"] == 0.0, "sigma_g1.5"].iloc[0] > 100


def test_fig4b_near_threshold_column(tmp_path):
    out = tmp_path / "figs"
    assert main(["figure", "fig4b", "--out", str(out)]) == 0
    frame = read_table(out / "fig4b.tsv").frame
    assert len(frame) == 50
    close = frame[frame["epsilon"] <= 0.1]
    assert close["relative_difference"].max() < 0.02
    row = frame[np.isclose(frame["epsilon"], 0.1)].iloc[0]
    assert row["sigma_exact"] == pytest.approx(0.0025042, rel=1e-4)


def test_fig4a_with_explicit_epsilons(tmp_path):
    out = tmp_path / "figs"
    assert main(["figure", "fig4a", "--out", str(out), "--points", "41", "--span", "0.2", "--epsilon", "0.05,0.1"]) == 0
    frame = read_table(out / "fig4a.tsv").frame
    assert {"exact_eps0.05", "approx_eps0.05", "exact_eps0.1", "approx_eps0.1"} <= set(frame.columns)


def test_fig5_tuning_table(tmp_path):
    out = tmp_path / "figs"
    assert main(["figure", "fig5", "--out", str(out)]) == 0
    frame = read_table(out / "fig5.tsv").frame
    assert len(frame) == 71
    degenerate = frame[frame["lambda_s_nm"] == 1600.0].iloc[0]
    assert degenerate["omega_gvm"] == math.inf
    assert degenerate["poling_period_nm"] == pytest.approx(367.7, abs=0.5)
    assert frame["abs_gvm_over_gvs"].min() >= 100
    assert (out / "fig5a.svg").is_file()
    assert (out / "fig5b.svg").is_file()


def test_sweep_compares_models(tmp_path):
    job = _write_job(
        tmp_path / "job.json",
        gains=[1.0],
        models="exact,linearized",
        points=101,
        output_dir=str(tmp_path / "sweep"),
    )
    assert main(["sweep", "--config", job]) == 0
    tables = sorted((tmp_path / "sweep").glob("sweep_*.tsv"))
    assert len(tables) == 1
    table = read_table(tables[0])
    assert table.metadata["models"] == "exact,linearized"
    assert table.frame["relative_difference"].max() < 0.01
    assert table.frame["term_balance"].max() < 1e-8


def test_sweep_flags_override_file(tmp_path):
    job = _write_job(tmp_path / "job.json", gains=[1.0], points=101)
    out = tmp_path / "flags"
    assert main(["sweep", "--config", job, "--g", "1.2,1.4", "--phase", "optimal", "--out", str(out)]) == 0
    tables = sorted(out.glob("sweep_*.tsv"))
    assert len(tables) == 2
    assert read_table(tables[0]).metadata["phi_sum"] == "optimal"


def test_sweep_nondegenerate_with_delay(tmp_path):
    job = _write_job(
        tmp_path / "job.json",
        signal_wavelength_nm=1300,
        gains=[1.4],
        delta_t="tau_gvm",
        points=51,
        output_dir=str(tmp_path / "nd"),
    )
    assert main(["sweep", "--config", job]) == 0
    table = read_table(next((tmp_path / "nd").glob("sweep_*.tsv")))
    assert table.metadata["omega_gvm"] != "unbounded"
    assert table.frame["term_balance"].max() < 1e-9


def test_config_error_exit_code(tmp_path):
    job = _write_job(tmp_path / "job.json", gains=[1.5708])
    assert main(["sweep", "--config", job]) == 2
    unknown = _write_job(tmp_path / "unknown.json", colour="blue")
    assert main(["sweep", "--config", unknown]) == 2
    assert main(["sweep", "--config", str(tmp_path / "missing.json")]) == 2


def test_domain_error_exit_code(tmp_path):
    job = _write_job(tmp_path / "job.json", pump_wavelength_nm=300, gains=[1.0], points=11)
    assert main(["sweep", "--config", job]) == 3


def test_materials_listing(capsys):
    assert main(["materials"]) == 0
    assert "linbo3_congruent_e" in capsys.readouterr().out.split()


def test_selfcheck_passes(tmp_path, capsys):
    out = tmp_path / "check"
    assert main(["selfcheck", "--json", "--out", str(out)]) == 0
    results = json.loads(capsys.readouterr().out)
    families = {result["family"] for result in results}
    assert {"unitarity", "reciprocity", "optimality", "exact_vs_linearized", "near_threshold"} <= families
    assert all(result["passed"] for result in results)
    report = (out / "selfcheck_report.md").read_text(encoding="utf-8")
    assert "All invariants hold: YES" in report


def test_selfcheck_detects_flipped_conversion_term(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("MOPO_DEBUG_FLIP_VS", "1")
    assert main(["selfcheck", "--json", "--out", str(tmp_path / "check")]) == 1
    results = json.loads(capsys.readouterr().out)
    unitarity = [result for result in results if result["family"] == "unitarity"]
    assert unitarity
    assert not any(result["passed"] for result in unitarity)
    assert "W=" in unitarity[0]["details"]


def test_gains_closer_than_display_precision_keep_separate_columns(tmp_path):
    out = tmp_path / "figs"
    assert main(["figure", "fig2", "--out", str(out), "--points", "11", "--epsilon", "1e-7,3e-7"]) == 0
    table = read_table(out / "fig2.tsv")
    gains = [math.pi / 2 - 1e-7, math.pi / 2 - 3e-7]
    assert list(table.frame.columns) == ["omega_over_gvs"] + [f"sigma_g{gain!r}" for gain in gains]
    assert table.metadata["g"] == ",".join(repr(gain) for gain in gains)


def test_repeated_gain_is_a_config_error(tmp_path):
    assert main(["figure", "fig2", "--out", str(tmp_path / "figs"), "--points", "11", "--g", "1.0,1.0"]) == 2


def test_sweep_writes_optimal_phase(tmp_path):
    job = _write_job(tmp_path / "job.json", gains=[1.2], points=101, output_dir=str(tmp_path / "phase"))
    assert main(["sweep", "--config", job]) == 0
    frame = read_table(next((tmp_path / "phase").glob("sweep_*.tsv"))).frame
    inside = frame[frame["omega_over_gvs"].abs() <= 1.0]
    at_zero = frame.loc[frame["omega_over_gvs"] == 0.0, "optimal_phase"].iloc[0]
    drift = np.angle(np.exp(1j * (inside["optimal_phase"].to_numpy() - at_zero)))
    assert np.max(np.abs(drift)) < 1e-9
