"""
Regenerate every reference figure and sanity-check the written tables.

Checks in one command:
1) fig2, fig3, fig4a, fig4b and fig5 tables + SVGs are written.
2) Key values in the tables match the closed forms.
3) The invariant self-check passes.

Usage:
  python execution/reproduce_figures.py
  python execution/reproduce_figures.py --out .tmp/mopo_reference --points 501
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict, replace
from pathlib import Path

from dotenv import load_dotenv

PROJECT_ROOT = Path(__file__).resolve().parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from mopo_squeeze.config import MopoSettings, RunConfig  # noqa: E402
from mopo_squeeze.errors import MopoError  # noqa: E402
from mopo_squeeze.figures import FIGURE_NAMES, run_figure  # noqa: E402
from mopo_squeeze.selfcheck import CheckResult, run_selfcheck, write_report  # noqa: E402
from mopo_squeeze.tables import read_table  # noqa: E402

logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(levelname)s - %(message)s")
logger = logging.getLogger(__name__)

TMP_DIR = PROJECT_ROOT / ".tmp"


def check_fig2(out_dir: Path) -> CheckResult:
    table = read_table(out_dir / "fig2.tsv")
    frame = table.frame
    at_zero = frame.loc[frame["omega_over_gvs"] == 0.0, "sigma_g1"].iloc[0]
    expected = (1.0 - math.sin(1.0)) / (1.0 + math.sin(1.0))
    passed = abs(at_zero - expected) < 1e-9
    return CheckResult("tables", "fig2_sigma0_g1", passed, f"Sigma(0)={at_zero:.9g}, closed form {expected:.9g}")


def check_fig4b(out_dir: Path) -> CheckResult:
    frame = read_table(out_dir / "fig4b.tsv").frame
    small = frame[frame["epsilon"] <= 0.1]
    worst = float(small["relative_difference"].max())
    return CheckResult("tables", "fig4b_near_threshold", worst < 0.02, f"max relative difference for eps<=0.1: {worst:.3g}")


def check_fig5(out_dir: Path) -> CheckResult:
    frame = read_table(out_dir / "fig5.tsv").frame
    ratio = float(frame["abs_gvm_over_gvs"].min())
    return CheckResult("tables", "fig5_gvm_dominates", ratio >= 100.0, f"min |W_gvm|/W_gvs = {ratio:.4g}")


def main() -> None:
    load_dotenv()
    settings = MopoSettings.from_env()

    parser = argparse.ArgumentParser(description="Regenerate all MOPO reference figures and validate them.")
    parser.add_argument("--out", default=str(TMP_DIR / "mopo_reference"), help="Output directory.")
    parser.add_argument("--points", type=int, default=1001, help="Odd grid size for the spectra.")
    parser.add_argument(
        "--report-path",
        default=str(TMP_DIR / "mopo_reference" / "reproduction_report.md"),
        help="Path to write markdown report.",
    )
    args = parser.parse_args()

    out_dir = Path(args.out).resolve()
    config = replace(RunConfig(), output_dir=out_dir, points=args.points)
    results: list[CheckResult] = []
    for name in FIGURE_NAMES:
        try:
            output = run_figure(name, config, settings)
            results.append(
                CheckResult("figures", name, True, ", ".join(path.name for path in output.tables + output.plots))
            )
        except MopoError as exc:
            results.append(CheckResult("figures", name, False, f"{type(exc).__name__}: {exc}"))

    if all(result.passed for result in results):
        results.extend([check_fig2(out_dir), check_fig4b(out_dir), check_fig5(out_dir)])
    results.extend(run_selfcheck(settings))

    report_path = Path(args.report_path).resolve()
    write_report(results, report_path, context={"output_dir": str(out_dir), "points": str(args.points)})
    print(f"Wrote report: {report_path}")
    print(json.dumps([asdict(result) for result in results], indent=2))

    if any(not result.passed for result in results):
        raise SystemExit(1)


if __name__ == "__main__":
    main()
