"""
Invariant self-check. Every family runs on fixed seeds so a report is reproducible.

MOPO_DEBUG_FLIP_VS=1 negates V_s inside the Bogoliubov coefficients; the
unitarity family must then fail and name the offending detuning.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from mopo_squeeze.bogoliubov import GAIN_THRESHOLD, ModelVariant, coefficients, unitarity_residuals
from mopo_squeeze.config import FIGURE_GAINS, MopoSettings
from mopo_squeeze.dispersion import DEFAULT_MATERIAL, DerivedScales, derived_scales, load_material
from mopo_squeeze.errors import MopoError
from mopo_squeeze.phase_matching import TuningConfiguration, qpm_residual, solve_signal_wavelength
from mopo_squeeze.spectra import (
    ApproximationWarning,
    Branch,
    QuadratureSetting,
    fixed_phase_setting,
    near_threshold_squeeze,
    optimal_phase,
    spectrum_general,
    spectrum_optimized,
    spectrum_universal,
    squeezing_bandwidth,
)

logger = logging.getLogger(__name__)

SEED = 20170605
UNITARITY_SAMPLES = 1000
UNITARITY_TOLERANCE = 1e-10
RECIPROCITY_GAINS = 100
RECIPROCITY_DETUNINGS = 100
OPTIMALITY_SAMPLES = 100
PUMP_WAVELENGTH = 800e-9
NONDEGENERATE_SIGNAL = 1.3e-6
EXPECTED_DEGENERATE_PERIOD = 368e-9
PERIOD_WINDOW = 3e-9


@dataclass
class CheckResult:
    family: str
    name: str
    passed: bool
    details: str


def _degenerate_tuning(settings: MopoSettings) -> tuple[TuningConfiguration, DerivedScales]:
    material = load_material(DEFAULT_MATERIAL, settings.materials_path)
    tuning = TuningConfiguration.degenerate(material, PUMP_WAVELENGTH)
    return tuning, derived_scales(tuning)


def check_unitarity(
    tuning: TuningConfiguration,
    scales: DerivedScales,
    rng: np.random.Generator,
    *,
    debug_flip_vs: bool = False,
) -> list[CheckResult]:
    gains = rng.uniform(0.0, 1.55, UNITARITY_SAMPLES)
    detunings = rng.uniform(-20.0, 20.0, UNITARITY_SAMPLES)
    results: list[CheckResult] = []
    for model in ModelVariant:
        worst = 0.0
        worst_at = (0.0, 0.0)
        for gain, omega_tilde in zip(gains, detunings):
            at_gain = tuning.with_gain(float(gain))
            omega = float(omega_tilde) * scales.omega_gvs
            residuals = unitarity_residuals(
                coefficients(at_gain, scales, omega, model, debug_flip_vs=debug_flip_vs),
                coefficients(at_gain, scales, -omega, model, debug_flip_vs=debug_flip_vs),
            )
            if residuals.worst() > worst:
                worst = residuals.worst()
                worst_at = (float(gain), omega)
        passed = worst < UNITARITY_TOLERANCE
        details = (
            f"{UNITARITY_SAMPLES} samples, worst residual {worst:.3g} at g={worst_at[0]:.6g}, "
            f"W={worst_at[1]:.6g} rad/s (W/W_gvs={worst_at[1] / scales.omega_gvs:.6g})"
        )
        if not passed:
            logger.error("Unitarity violated (%s): %s", model.value, details)
        results.append(CheckResult("unitarity", f"bogoliubov_{model.value}", passed, details))
    return results


def check_reciprocity(
    tuning: TuningConfiguration,
    scales: DerivedScales,
    rng: np.random.Generator,
) -> list[CheckResult]:
    worst = 0.0
    for gain in rng.uniform(0.0, GAIN_THRESHOLD - 1e-4, RECIPROCITY_GAINS):
        omega_tilde = rng.uniform(-20.0, 20.0, RECIPROCITY_DETUNINGS)
        squeeze = np.asarray(spectrum_universal(float(gain), omega_tilde, Branch.SQUEEZE))
        anti = np.asarray(spectrum_universal(float(gain), omega_tilde, Branch.ANTISQUEEZE))
        worst = max(worst, float(np.max(np.abs(squeeze * anti - 1.0))))
    universal = CheckResult(
        "reciprocity",
        "universal_product",
        worst < 1e-12,
        f"{RECIPROCITY_GAINS * RECIPROCITY_DETUNINGS} samples, max |S_sq S_anti - 1| = {worst:.3g}",
    )

    general_worst = 0.0
    omega = rng.uniform(-10.0, 10.0, RECIPROCITY_DETUNINGS) * scales.omega_gvs
    for gain in rng.uniform(0.0, 1.5, 20):
        at_gain = tuning.with_gain(float(gain))
        setting = fixed_phase_setting(at_gain)
        squeeze = np.asarray(spectrum_general(at_gain, scales, setting, omega))
        anti = np.asarray(spectrum_general(at_gain, scales, setting.orthogonal(), omega))
        general_worst = max(general_worst, float(np.max(np.abs(squeeze * anti - 1.0))))
    general = CheckResult(
        "reciprocity",
        "general_orthogonal_quadratures",
        general_worst < 1e-8,
        f"degenerate tuning, max |S_sq S_anti - 1| = {general_worst:.3g}",
    )
    return [universal, general]


def check_optimality(
    tuning: TuningConfiguration,
    scales: DerivedScales,
    rng: np.random.Generator,
) -> list[CheckResult]:
    gains = rng.uniform(0.0, 1.5, OPTIMALITY_SAMPLES)
    detunings = rng.uniform(-10.0, 10.0, OPTIMALITY_SAMPLES) * scales.omega_gvs
    phases = rng.uniform(-math.pi, math.pi, OPTIMALITY_SAMPLES)
    lower_bound_gap = 0.0
    equality_gap = 0.0
    above_shot_noise = 0.0
    for gain, omega, phase in zip(gains, detunings, phases):
        at_gain = tuning.with_gain(float(gain))
        best = float(spectrum_optimized(at_gain, scales, omega))
        arbitrary = float(spectrum_general(at_gain, scales, QuadratureSetting(phi_sum=float(phase)), omega))
        lower_bound_gap = max(lower_bound_gap, best - arbitrary)
        at_optimum = QuadratureSetting(phi_sum=float(optimal_phase(at_gain, scales, omega, keep_beta=True)))
        equality_gap = max(equality_gap, abs(float(spectrum_general(at_gain, scales, at_optimum, omega)) - best) / best)
        above_shot_noise = max(above_shot_noise, best - 1.0)
    return [
        CheckResult(
            "optimality",
            "optimized_is_lower_bound",
            lower_bound_gap <= 1e-12,
            f"{OPTIMALITY_SAMPLES} random phases, max(S_opt - S) = {lower_bound_gap:.3g}",
        ),
        CheckResult(
            "optimality",
            "optimal_phase_attains_bound",
            equality_gap < 1e-9,
            f"max relative gap at the optimal phase = {equality_gap:.3g}",
        ),
        CheckResult(
            "optimality",
            "optimized_below_shot_noise",
            above_shot_noise <= 1e-12,
            f"max(S_opt - 1) = {above_shot_noise:.3g}",
        ),
    ]


def check_exact_vs_linearized(tuning: TuningConfiguration, scales: DerivedScales) -> list[CheckResult]:
    results: list[CheckResult] = []
    for span, tolerance in ((5.0, 0.01), (15.0, 0.05)):
        grid = np.linspace(-span, span, 201) * scales.omega_gvs
        worst = 0.0
        for gain in FIGURE_GAINS:
            at_gain = tuning.with_gain(gain)
            setting = fixed_phase_setting(at_gain)
            exact = np.asarray(spectrum_general(at_gain, scales, setting, grid, ModelVariant.EXACT))
            linear = np.asarray(spectrum_general(at_gain, scales, setting, grid, ModelVariant.LINEARIZED))
            worst = max(worst, float(np.max(np.abs(exact - linear) / linear)))
        results.append(
            CheckResult(
                "exact_vs_linearized",
                f"span_{span:g}",
                worst < tolerance,
                f"|W/W_gvs| <= {span:g}, max relative difference {worst:.3g} (limit {tolerance:g})",
            )
        )
    return results


def check_near_threshold() -> list[CheckResult]:
    cases = ((0.02, 0.0, 0.02), (0.05, 0.0, 0.02), (0.1, 0.0, 0.02), (0.1, 0.05, 0.02), (0.3, 0.0, 0.1))
    results: list[CheckResult] = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ApproximationWarning)
        for epsilon, omega_tilde, tolerance in cases:
            exact = float(spectrum_universal(GAIN_THRESHOLD - epsilon, omega_tilde))
            approx = float(near_threshold_squeeze(epsilon, omega_tilde))
            relative = abs(exact - approx) / exact
            results.append(
                CheckResult(
                    "near_threshold",
                    f"eps_{epsilon:g}_w_{omega_tilde:g}",
                    relative < tolerance,
                    f"exact {exact:.6g}, approx {approx:.6g}, relative difference {relative:.3g}",
                )
            )
    return results


def check_bandwidth(scales: DerivedScales) -> list[CheckResult]:
    worst = 0.0
    for gain in FIGURE_GAINS:
        edge = squeezing_bandwidth(gain, scales) / scales.omega_gvs
        worst = max(worst, abs(float(spectrum_universal(gain, edge)) - 1.0))
    return [
        CheckResult(
            "bandwidth",
            "shot_noise_crossing",
            worst < 1e-12,
            f"max |S(W_bw) - 1| = {worst:.3g} over g in {FIGURE_GAINS}",
        )
    ]


def check_poling_period(tuning: TuningConfiguration) -> list[CheckResult]:
    period = tuning.poling_period
    degenerate = CheckResult(
        "poling_period",
        "degenerate_800nm",
        abs(period - EXPECTED_DEGENERATE_PERIOD) <= PERIOD_WINDOW,
        f"Lambda = {period * 1e9:.4f} nm (expected {EXPECTED_DEGENERATE_PERIOD * 1e9:g} +/- {PERIOD_WINDOW * 1e9:g})",
    )
    material = tuning.material
    target = TuningConfiguration.solved(material, PUMP_WAVELENGTH, NONDEGENERATE_SIGNAL)
    try:
        root = solve_signal_wavelength(material, PUMP_WAVELENGTH, target.poling_period, 1, (1.1e-6, 1.5e-6))
        residual = qpm_residual(material, PUMP_WAVELENGTH, root, target.poling_period)
        passed = abs(root - NONDEGENERATE_SIGNAL) < 1e-12
        details = f"recovered lambda_s = {root * 1e9:.9f} nm, residual {residual:.3g} rad/m"
    except MopoError as exc:
        passed = False
        details = str(exc)
    return [degenerate, CheckResult("poling_period", "solve_round_trip", passed, details)]


def run_selfcheck(settings: MopoSettings, *, debug_flip_vs: bool | None = None) -> list[CheckResult]:
    flip = settings.debug_flip_vs if debug_flip_vs is None else debug_flip_vs
    if flip:
        logger.warning("Fault injection active: V_s is negated")
    rng = np.random.default_rng(SEED)
    tuning, scales = _degenerate_tuning(settings)
    results: list[CheckResult] = []
    results.extend(check_unitarity(tuning, scales, rng, debug_flip_vs=flip))
    results.extend(check_reciprocity(tuning, scales, rng))
    results.extend(check_optimality(tuning, scales, rng))
    results.extend(check_exact_vs_linearized(tuning, scales))
    results.extend(check_near_threshold())
    results.extend(check_bandwidth(scales))
    results.extend(check_poling_period(tuning))
    return results


def write_report(results: list[CheckResult], report_path: Path, *, context: dict[str, str]) -> Path:
    report_path.parent.mkdir(parents=True, exist_ok=True)
    passed_count = sum(1 for result in results if result.passed)
    failed_count = len(results) - passed_count

    lines = ["# MOPO Self-Check Report", ""]
    lines.extend(f"- {key}: `{value}`" for key, value in context.items())
    lines.extend(["", "## Results"])
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        lines.append(f"- [{status}] `{result.family}:{result.name}` - {result.details}")
    lines.extend(
        [
            "",
            "## Summary",
            f"- Passed: {passed_count}",
            f"- Failed: {failed_count}",
            f"- All invariants hold: {'YES' if failed_count == 0 else 'NO'}",
        ]
    )
    report_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return report_path
