"""
Figure jobs: each writes one or more data tables plus an SVG rendering.

  fig2   squeezing spectra vs W/W_gvs at fixed phase, one curve per gain
  fig3   antisqueezing spectra (orthogonal phase), plus unit-peak normalised copy
  fig4a  exact spectrum vs the near-threshold parabola, one pair per epsilon
  fig4b  Sigma(0) vs epsilon: exact, near-threshold law, cavity OPO
  fig5   W_gvs and W_gvm along the phase-matched tuning curve
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from mopo_squeeze.bogoliubov import GAIN_THRESHOLD, ModelVariant
from mopo_squeeze.config import MopoSettings, RunConfig
from mopo_squeeze.dispersion import DerivedScales, derived_scales, load_material
from mopo_squeeze.errors import ConfigError
from mopo_squeeze.phase_matching import TuningConfiguration, tuning_curve
from mopo_squeeze.plotting import plot_curves
from mopo_squeeze.spectra import (
    ApproximationWarning,
    Branch,
    QuadratureSetting,
    SpectrumSeries,
    fixed_phase_setting,
    general_series,
    near_threshold_squeeze,
    normalize_peak,
    opo_spectrum,
    optimized_series,
    symmetric_grid,
)
from mopo_squeeze.tables import write_table

logger = logging.getLogger(__name__)

FIGURE_NAMES = ("fig2", "fig3", "fig4a", "fig4b", "fig5")
FIG4A_EPSILONS = (0.05, 0.1, 0.2, 0.3)
FIG4B_EPSILONS = tuple(step / 100 for step in range(1, 51))
FIG5_SIGNAL_NM = tuple(range(1300, 2001, 10))
OMEGA_AXIS_LABEL = "W / W_gvs"


@dataclass
class FigureOutput:
    name: str
    tables: list[Path] = field(default_factory=list)
    plots: list[Path] = field(default_factory=list)


def build_tuning(config: RunConfig, settings: MopoSettings) -> tuple[TuningConfiguration, DerivedScales]:
    material = load_material(config.material, settings.materials_path)
    if config.degenerate:
        tuning = TuningConfiguration.degenerate(
            material,
            config.pump_wavelength,
            m_order=config.qpm_order,
            crystal_length=config.crystal_length,
            pump_phase=config.pump_phase,
        )
    else:
        tuning = TuningConfiguration.solved(
            material,
            config.pump_wavelength,
            config.signal_wavelength,
            m_order=config.qpm_order,
            crystal_length=config.crystal_length,
            pump_phase=config.pump_phase,
        )
    return tuning, derived_scales(tuning)


def resolve_delta_t(config: RunConfig, scales: DerivedScales) -> float:
    if config.delta_t == "zero":
        return 0.0
    if config.delta_t == "tau_gvm":
        return scales.tau_gvm
    return float(config.delta_t)


def resolve_setting(
    config: RunConfig,
    tuning: TuningConfiguration,
    scales: DerivedScales,
    branch: Branch,
) -> QuadratureSetting | None:
    """None means per-frequency optimal phase."""
    delta_t = resolve_delta_t(config, scales)
    if config.phase == "optimal":
        if branch is not Branch.SQUEEZE:
            raise ConfigError("phase=optimal is only defined for the squeeze branch")
        return None
    if config.phase == "fixed":
        return fixed_phase_setting(tuning, branch, delta_t)
    return QuadratureSetting(phi_sum=float(config.phase), delta_t=delta_t, branch=branch)


def spectrum_series(
    config: RunConfig,
    tuning: TuningConfiguration,
    scales: DerivedScales,
    grid: np.ndarray,
    model: ModelVariant,
    branch: Branch,
    *,
    workers: int = 1,
) -> SpectrumSeries:
    setting = resolve_setting(config, tuning, scales, branch)
    if setting is None:
        return optimized_series(tuning, scales, grid, model, workers=workers)
    return general_series(tuning, scales, setting, grid, model, workers=workers)


def base_metadata(
    figure: str,
    config: RunConfig,
    tuning: TuningConfiguration,
    scales: DerivedScales,
) -> dict[str, str]:
    return {
        "figure": figure,
        **config.describe(),
        "lambda_i": repr(tuning.lambda_i),
        "Lambda": repr(tuning.poling_period),
        "omega_gvs": repr(scales.omega_gvs),
        "omega_gvm": "unbounded" if scales.gvm_unbounded else repr(scales.omega_gvm),
    }


def _grid_text(config: RunConfig) -> str:
    return f"symmetric span={config.span!r} points={config.points}"


def value_labels(values: tuple[float, ...], what: str) -> list[str]:
    """Short `:g` labels, or full `repr` labels when the short ones collide."""
    if len(set(values)) != len(values):
        raise ConfigError(f"Duplicate {what} values: {', '.join(repr(value) for value in values)}")
    short = [f"{value:g}" for value in values]
    if len(set(short)) == len(short):
        return short
    return [repr(value) for value in values]


def _log_approximation_warnings(caught: list[warnings.WarningMessage]) -> None:
    messages = sorted({str(item.message) for item in caught if issubclass(item.category, ApproximationWarning)})
    for message in messages:
        logger.info("Approximation regime: %s", message)


def _spectra_figure(
    name: str,
    branch: Branch,
    config: RunConfig,
    settings: MopoSettings,
) -> FigureOutput:
    tuning, scales = build_tuning(config, settings)
    model = ModelVariant(config.models[0])
    grid = symmetric_grid(config.span, config.points)
    columns: dict[str, np.ndarray] = {"omega_over_gvs": grid}
    curves: dict[str, np.ndarray] = {}
    phi_sum = "optimal"
    for gain, label in zip(config.all_gains, value_labels(config.all_gains, "gain")):
        series = spectrum_series(
            config, tuning.with_gain(gain), scales, grid, model, branch, workers=settings.workers
        )
        phi_sum = series.metadata["phi_sum"]
        columns[f"sigma_g{label}"] = series.values
        curves[f"g = {label}"] = series.values
        logger.info("%s g=%g: Sigma(0)=%.6g", name, gain, series.at_zero())

    metadata = {
        **base_metadata(name, config, tuning, scales),
        "g": ",".join(repr(gain) for gain in config.all_gains),
        "model": model.value,
        "branch": branch.value,
        "phi_sum": phi_sum,
        "delta_t": repr(resolve_delta_t(config, scales)),
        "grid": _grid_text(config),
    }
    out_dir = Path(config.output_dir)
    output = FigureOutput(name=name)
    output.tables.append(write_table(out_dir / f"{name}.tsv", metadata, columns))
    title = "Squeezing spectra" if branch is Branch.SQUEEZE else "Antisqueezing spectra"
    output.plots.append(
        plot_curves(
            out_dir / f"{name}.svg",
            grid,
            curves,
            xlabel=OMEGA_AXIS_LABEL,
            ylabel="Sigma",
            title=title,
            logy=True,
            reference=1.0,
        )
    )

    if branch is Branch.ANTISQUEEZE:
        normalized = {key: normalize_peak(values) for key, values in columns.items() if key != "omega_over_gvs"}
        norm_columns = {"omega_over_gvs": grid, **{f"{key}_norm": values for key, values in normalized.items()}}
        norm_meta = {**metadata, "figure": f"{name}b", "normalization": "unit peak per curve"}
        output.tables.append(write_table(out_dir / f"{name}b.tsv", norm_meta, norm_columns))
        output.plots.append(
            plot_curves(
                out_dir / f"{name}b.svg",
                grid,
                {label: normalize_peak(values) for label, values in curves.items()},
                xlabel=OMEGA_AXIS_LABEL,
                ylabel="Sigma / max Sigma",
                title="Antisqueezing spectra, normalised",
            )
        )
    return output


def _fig4a(config: RunConfig, settings: MopoSettings) -> FigureOutput:
    tuning, scales = build_tuning(config, settings)
    model = ModelVariant(config.models[0])
    epsilons = config.epsilons or FIG4A_EPSILONS
    grid = symmetric_grid(config.span, config.points)
    columns: dict[str, np.ndarray] = {"omega_over_gvs": grid}
    curves: dict[str, np.ndarray] = {}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ApproximationWarning)
        for epsilon, label in zip(epsilons, value_labels(tuple(epsilons), "epsilon")):
            gain = GAIN_THRESHOLD - epsilon
            series = spectrum_series(
                config, tuning.with_gain(gain), scales, grid, model, Branch.SQUEEZE, workers=settings.workers
            )
            approx = np.asarray(near_threshold_squeeze(epsilon, grid))
            columns[f"exact_eps{label}"] = series.values
            columns[f"approx_eps{label}"] = approx
            curves[f"exact eps={label}"] = series.values
            curves[f"approx eps={label}"] = approx
    _log_approximation_warnings(caught)

    metadata = {
        **base_metadata("fig4a", config, tuning, scales),
        "epsilon": ",".join(repr(epsilon) for epsilon in epsilons),
        "model": model.value,
        "branch": Branch.SQUEEZE.value,
        "phi_sum": str(config.phase),
        "delta_t": repr(resolve_delta_t(config, scales)),
        "grid": _grid_text(config),
    }
    out_dir = Path(config.output_dir)
    output = FigureOutput(name="fig4a")
    output.tables.append(write_table(out_dir / "fig4a.tsv", metadata, columns))
    output.plots.append(
        plot_curves(
            out_dir / "fig4a.svg",
            grid,
            curves,
            xlabel=OMEGA_AXIS_LABEL,
            ylabel="Sigma",
            title="Exact spectrum vs near-threshold law",
            logy=True,
        )
    )
    return output


def _fig4b(config: RunConfig, settings: MopoSettings) -> FigureOutput:
    tuning, scales = build_tuning(config, settings)
    model = ModelVariant(config.models[0])
    epsilons = np.asarray(config.epsilons or FIG4B_EPSILONS, dtype=float)
    gains = GAIN_THRESHOLD - epsilons
    zero = np.zeros(1)
    exact = np.empty_like(epsilons)
    for index, gain in enumerate(gains):
        series = spectrum_series(config, tuning.with_gain(float(gain)), scales, zero, model, Branch.SQUEEZE)
        exact[index] = series.values[0]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ApproximationWarning)
        approx = np.array([float(near_threshold_squeeze(float(eps), 0.0)) for eps in epsilons])
    _log_approximation_warnings(caught)
    opo = np.array([float(opo_spectrum(1.0 - float(eps), 0.0)) for eps in epsilons])

    columns = {
        "epsilon": epsilons,
        "g": gains,
        "sigma_exact": exact,
        "sigma_approx": approx,
        "relative_difference": np.abs(exact - approx) / approx,
        "sigma_opo": opo,
    }
    metadata = {
        **base_metadata("fig4b", config, tuning, scales),
        "model": model.value,
        "branch": Branch.SQUEEZE.value,
        "phi_sum": str(config.phase),
        "delta_t": repr(resolve_delta_t(config, scales)),
        "grid": "omega=0",
    }
    out_dir = Path(config.output_dir)
    output = FigureOutput(name="fig4b")
    output.tables.append(write_table(out_dir / "fig4b.tsv", metadata, columns))
    output.plots.append(
        plot_curves(
            out_dir / "fig4b.svg",
            epsilons,
            {"exact": exact, "eps^2 / 4": approx, "cavity OPO": opo},
            xlabel="epsilon = g_thr - g",
            ylabel="Sigma(0)",
            title="Zero-frequency squeezing vs distance from threshold",
            logy=True,
        )
    )
    return output


def _fig5(config: RunConfig, settings: MopoSettings) -> FigureOutput:
    material = load_material(config.material, settings.materials_path)
    signal_nm = np.asarray(FIG5_SIGNAL_NM, dtype=float)
    points = tuning_curve(
        material,
        config.pump_wavelength,
        signal_nm * 1e-9,
        crystal_length=config.crystal_length,
        m_order=config.qpm_order,
    )
    lambda_i = np.array([tuning.lambda_i for tuning, _ in points])
    period = np.array([tuning.poling_period for tuning, _ in points])
    omega_gvs = np.array([scales.omega_gvs for _, scales in points])
    omega_gvm = np.array([math.inf if scales.gvm_unbounded else scales.omega_gvm for _, scales in points])

    columns = {
        "lambda_s_nm": signal_nm,
        "lambda_i_nm": lambda_i * 1e9,
        "poling_period_nm": period * 1e9,
        "omega_gvs": omega_gvs,
        "omega_gvm": omega_gvm,
        "abs_gvm_over_gvs": np.abs(omega_gvm) / omega_gvs,
    }
    metadata = {
        "figure": "fig5",
        "material": config.material,
        "lambda_p": repr(config.pump_wavelength),
        "l_c": repr(config.crystal_length),
        "m_order": str(config.qpm_order),
        "grid": f"lambda_s {FIG5_SIGNAL_NM[0]}:{FIG5_SIGNAL_NM[-1]}:10 nm",
        "units": "omega in rad/s; omega_gvm=inf at degeneracy",
    }
    out_dir = Path(config.output_dir)
    output = FigureOutput(name="fig5")
    output.tables.append(write_table(out_dir / "fig5.tsv", metadata, columns))
    output.plots.append(
        plot_curves(
            out_dir / "fig5a.svg",
            signal_nm,
            {"W_gvs": omega_gvs},
            xlabel="signal wavelength (nm)",
            ylabel="rad/s",
            title="Narrow MOPO bandwidth W_gvs",
        )
    )
    finite = np.isfinite(omega_gvm)
    output.plots.append(
        plot_curves(
            out_dir / "fig5b.svg",
            signal_nm[finite],
            {"|W_gvm|": np.abs(omega_gvm[finite])},
            xlabel="signal wavelength (nm)",
            ylabel="rad/s",
            title="GVM bandwidth |W_gvm|",
            logy=True,
        )
    )
    degenerate = [scales for tuning, scales in points if tuning.is_degenerate]
    if degenerate:
        logger.info("fig5: W_gvs at degeneracy = %.4g rad/s", degenerate[0].omega_gvs)
    return output


def run_figure(name: str, config: RunConfig, settings: MopoSettings) -> FigureOutput:
    if name not in FIGURE_NAMES:
        raise ConfigError(f"Unknown figure {name!r}; expected one of {', '.join(FIGURE_NAMES)}")
    config.validate()
    logger.info("Running %s into %s", name, config.output_dir)
    if name == "fig2":
        return _spectra_figure("fig2", Branch.SQUEEZE, config, settings)
    if name == "fig3":
        return _spectra_figure("fig3", Branch.ANTISQUEEZE, config, settings)
    if name == "fig4a":
        return _fig4a(config, settings)
    if name == "fig4b":
        return _fig4b(config, settings)
    return _fig5(config, settings)
