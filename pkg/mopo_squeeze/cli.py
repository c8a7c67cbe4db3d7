from __future__ import annotations

import argparse
import json
import logging
from dataclasses import asdict, replace
from pathlib import Path
from typing import Any, Sequence

from dotenv import load_dotenv

from mopo_squeeze.config import MopoSettings, RunConfig
from mopo_squeeze.dispersion import list_materials
from mopo_squeeze.errors import MopoError
from mopo_squeeze.figures import FIGURE_NAMES, run_figure
from mopo_squeeze.selfcheck import run_selfcheck, write_report
from mopo_squeeze.sweep import run_sweep

logger = logging.getLogger("mopo_squeeze")

REPORT_NAME = "selfcheck_report.md"


def _add_job_overrides(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--material", default=None, help="Material name (see `materials`).")
    parser.add_argument("--pump-nm", dest="pump_wavelength_nm", type=float, default=None)
    parser.add_argument(
        "--signal-nm",
        dest="signal_wavelength_nm",
        default=None,
        help="Signal wavelength in nm, or 'degenerate'.",
    )
    parser.add_argument("--length-mm", dest="crystal_length_mm", type=float, default=None)
    parser.add_argument("--order", dest="qpm_order", type=int, default=None, help="Odd QPM order m.")
    parser.add_argument("--pump-phase", dest="pump_phase", type=float, default=None)
    parser.add_argument("--g", dest="gains", default=None, help="Comma-separated gains, e.g. 1.0,1.5")
    parser.add_argument(
        "--epsilon",
        dest="epsilons",
        default=None,
        help="Comma-separated distances below threshold, giving gains pi/2 - eps. "
        "Combined with --g when both are given; alone, they replace the default and job-file gains.",
    )
    parser.add_argument("--model", dest="models", default=None, help="exact, linearized or both comma-separated.")
    parser.add_argument("--phase", default=None, help="fixed, optimal or a number (rad).")
    parser.add_argument("--branch", default=None, choices=["squeeze", "antisqueeze"])
    parser.add_argument("--delta-t", dest="delta_t", default=None, help="zero, tau_gvm or seconds.")
    parser.add_argument("--span", type=float, default=None, help="Half-width of the grid in W_gvs.")
    parser.add_argument("--points", type=int, default=None, help="Odd number of grid points.")
    parser.add_argument("--out", dest="output_dir", default=None, help="Output directory.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mopo-squeeze",
        description="Squeezing spectra of a mirrorless OPO below threshold.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    figure = sub.add_parser("figure", help="Regenerate one reference figure (table + SVG).")
    figure.add_argument("name", choices=FIGURE_NAMES)
    figure.add_argument("--config", default=None, help="Optional JSON job file.")
    _add_job_overrides(figure)

    sweep = sub.add_parser("sweep", help="Evaluate spectra for a JSON job file.")
    sweep.add_argument("--config", required=True, help="JSON job file.")
    _add_job_overrides(sweep)

    check = sub.add_parser("selfcheck", help="Run the invariant self-check.")
    check.add_argument("--json", action="store_true", help="Print results as JSON.")
    check.add_argument("--out", dest="output_dir", default=None, help="Directory for the report.")

    sub.add_parser("materials", help="List available dispersion models.")
    return parser


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    keys = (
        "material",
        "pump_wavelength_nm",
        "signal_wavelength_nm",
        "crystal_length_mm",
        "qpm_order",
        "pump_phase",
        "gains",
        "epsilons",
        "models",
        "phase",
        "branch",
        "delta_t",
        "span",
        "points",
        "output_dir",
    )
    return {key: getattr(args, key, None) for key in keys}


def load_run_config(args: argparse.Namespace, settings: MopoSettings) -> RunConfig:
    """Defaults, then the JSON file, then flags. MOPO_OUTPUT_DIR applies when neither names a directory."""
    base = replace(RunConfig(), output_dir=Path(settings.output_dir))
    if args.config:
        path = Path(args.config)
        from_file = RunConfig.from_json_file(path)
        payload = json.loads(path.read_text(encoding="utf-8"))
        if "output_dir" not in payload:
            from_file = replace(from_file, output_dir=base.output_dir)
        base = from_file
    return base.with_overrides(_overrides(args)).validate()


def _cmd_figure(args: argparse.Namespace, settings: MopoSettings) -> int:
    config = load_run_config(args, settings)
    output = run_figure(args.name, config, settings)
    for path in output.tables + output.plots:
        logger.info("Wrote %s", path)
    return 0


def _cmd_sweep(args: argparse.Namespace, settings: MopoSettings) -> int:
    config = load_run_config(args, settings)
    written = run_sweep(config, settings)
    logger.info("Sweep wrote %d table(s) into %s", len(written), config.output_dir)
    return 0


def _cmd_selfcheck(args: argparse.Namespace, settings: MopoSettings) -> int:
    results = run_selfcheck(settings)
    out_dir = Path(args.output_dir or settings.output_dir)
    report = write_report(
        results,
        out_dir / REPORT_NAME,
        context={"material": "linbo3_congruent_e", "debug_flip_vs": str(settings.debug_flip_vs)},
    )
    failed = [result for result in results if not result.passed]
    if args.json:
        print(json.dumps([asdict(result) for result in results], indent=2))
    else:
        for result in results:
            status = "PASS" if result.passed else "FAIL"
            print(f"[{status}] {result.family}:{result.name} - {result.details}")
    logger.info("Report written to %s", report)
    if failed:
        logger.error("%d invariant check(s) failed", len(failed))
        return 1
    return 0


def _cmd_materials(settings: MopoSettings) -> int:
    for name in list_materials(settings.materials_path):
        print(name)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    load_dotenv()
    settings = MopoSettings.from_env()
    logging.basicConfig(
        level=getattr(logging, settings.log_level, logging.INFO),
        format="%(asctime)s - %(levelname)s - %(message)s",
    )
    logging.captureWarnings(True)
    args = build_parser().parse_args(argv)

    try:
        if args.command == "figure":
            return _cmd_figure(args, settings)
        if args.command == "sweep":
            return _cmd_sweep(args, settings)
        if args.command == "selfcheck":
            return _cmd_selfcheck(args, settings)
        return _cmd_materials(settings)
    except MopoError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code
    finally:
        logging.captureWarnings(False)


def run() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    run()
