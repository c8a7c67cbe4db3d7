from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from mopo_squeeze.bogoliubov import ModelVariant
from mopo_squeeze.config import MopoSettings, RunConfig
from mopo_squeeze.figures import base_metadata, build_tuning, resolve_delta_t, resolve_setting, spectrum_series
from mopo_squeeze.spectra import Branch, optimal_phase, symmetric_grid, term_balance
from mopo_squeeze.tables import write_table

logger = logging.getLogger(__name__)


def sweep_table_name(index: int, gain: float, branch: Branch) -> str:
    return f"sweep_{index:02d}_g{gain:.6f}_{branch.value}.tsv"


def run_sweep(config: RunConfig, settings: MopoSettings) -> list[Path]:
    """One table per gain: the spectrum under every requested model on a shared grid."""
    config.validate()
    branch = Branch(config.branch)
    models = [ModelVariant(model) for model in config.models]
    tuning, scales = build_tuning(config, settings)
    grid = symmetric_grid(config.span, config.points)
    delta_t = resolve_delta_t(config, scales)
    out_dir = Path(config.output_dir)
    logger.info(
        "Sweep: %d gain(s), models=%s, Lambda=%.6g m, W_gvs=%.6g rad/s",
        len(config.all_gains),
        ",".join(model.value for model in models),
        tuning.poling_period,
        scales.omega_gvs,
    )

    written: list[Path] = []
    for index, gain in enumerate(config.all_gains):
        at_gain = tuning.with_gain(gain)
        columns: dict[str, np.ndarray] = {"omega_over_gvs": grid}
        phi_sum = "optimal"
        for model in models:
            series = spectrum_series(config, at_gain, scales, grid, model, branch, workers=settings.workers)
            columns[f"sigma_{model.value}"] = series.values
            phi_sum = series.metadata["phi_sum"]
        if len(models) >= 2:
            first = columns[f"sigma_{models[0].value}"]
            second = columns[f"sigma_{models[1].value}"]
            columns["relative_difference"] = np.abs(first - second) / second
        columns["optimal_phase"] = np.asarray(optimal_phase(at_gain, scales, grid * scales.omega_gvs, models[0]))

        metadata = {
            **base_metadata("sweep", config, at_gain, scales),
            "g": repr(gain),
            "models": ",".join(model.value for model in models),
            "branch": branch.value,
            "phi_sum": phi_sum,
            "delta_t": repr(delta_t) if phi_sum != "optimal" else "optimal",
            "grid": f"symmetric span={config.span!r} points={config.points}",
        }
        setting = resolve_setting(config, at_gain, scales, branch)
        if setting is not None:
            balance = np.asarray(term_balance(at_gain, scales, setting, grid * scales.omega_gvs, models[0]))
            columns["term_balance"] = balance
            metadata["term_balance_max"] = repr(float(np.max(balance)))

        path = write_table(out_dir / sweep_table_name(index, gain, branch), metadata, columns)
        logger.info("Wrote %s", path)
        written.append(path)
    return written
