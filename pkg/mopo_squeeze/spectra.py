"""
Squeezing, antisqueezing and EPR-correlation spectra of the twin beams.

The general spectrum of the X_- (or Y_+) combination is

    Sigma(W) = 1/2 { |U_s(W)  - V_i*(-W) e^{+i W dt} e^{i phi_sum}|^2
                   + |U_s(-W) - V_i*(W)  e^{-i W dt} e^{i phi_sum}|^2 }

The X_- and Y_+ combinations give the same Sigma, so one formula serves both.
The antisqueezed (orthogonal) quadrature is the same formula with phi_sum + pi.
Shot noise is 1.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike, NDArray

from mopo_squeeze.bogoliubov import (
    GAIN_THRESHOLD,
    ModelVariant,
    check_below_threshold,
    coefficients,
    gamma,
    propagation_beta,
    sinc,
)
from mopo_squeeze.dispersion import DerivedScales, FloatOrArray, _as_output
from mopo_squeeze.errors import ConfigError, DomainError
from mopo_squeeze.phase_matching import TuningConfiguration, fixed_phase, wrap_phase

logger = logging.getLogger(__name__)

GRID_CHUNK = 512
APPROX_EPSILON_LIMIT = 0.3


class ApproximationWarning(UserWarning):
    """A near-threshold expansion is evaluated outside its intended regime."""


class Branch(str, Enum):
    SQUEEZE = "squeeze"
    ANTISQUEEZE = "antisqueeze"


@dataclass(frozen=True)
class QuadratureSetting:
    phi_sum: float
    delta_t: float = 0.0
    branch: Branch = Branch.SQUEEZE

    def __post_init__(self) -> None:
        try:
            branch = Branch(self.branch)
        except ValueError as exc:
            raise ConfigError(f"Unknown branch {self.branch!r}; expected squeeze or antisqueeze") from exc
        object.__setattr__(self, "branch", branch)

    @property
    def effective_phase(self) -> float:
        if self.branch is Branch.ANTISQUEEZE:
            return self.phi_sum + math.pi
        return self.phi_sum

    def orthogonal(self) -> "QuadratureSetting":
        flipped = Branch.SQUEEZE if self.branch is Branch.ANTISQUEEZE else Branch.ANTISQUEEZE
        return replace(self, branch=flipped)


@dataclass
class SpectrumSeries:
    grid: NDArray[np.float64]
    values: NDArray[np.float64]
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.grid.shape != self.values.shape:
            raise DomainError(
                f"Spectrum grid and values differ in shape: {self.grid.shape} vs {self.values.shape}"
            )

    def at_zero(self) -> float:
        return float(self.values[self.grid.size // 2])

    def to_frame(self, value_column: str = "sigma") -> pd.DataFrame:
        return pd.DataFrame({"omega_over_gvs": self.grid, value_column: self.values})


def symmetric_grid(span: float, points: int) -> NDArray[np.float64]:
    """Uniform grid on [-span, span] with W = 0 exactly on the middle point."""
    if points < 3 or points % 2 == 0:
        raise ConfigError(f"Grid point count must be odd and >= 3, got {points}")
    if not span > 0:
        raise ConfigError(f"Grid span must be > 0, got {span}")
    grid = np.linspace(-span, span, points)
    grid = 0.5 * (grid - grid[::-1])
    grid[points // 2] = 0.0
    return grid


def evaluate_on_grid(
    func: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    grid: ArrayLike,
    *,
    workers: int = 1,
) -> NDArray[np.float64]:
    """Evaluate a vectorised func in fixed-size chunks, optionally in threads.

    Chunk boundaries do not depend on the worker count, so results are
    bit-identical whatever the parallelism.
    """
    values = np.asarray(grid, dtype=float)
    chunks = [values[start : start + GRID_CHUNK] for start in range(0, values.size, GRID_CHUNK)]
    if workers <= 1 or len(chunks) <= 1:
        parts = [np.asarray(func(chunk)) for chunk in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = [np.asarray(part) for part in pool.map(func, chunks)]
    if not parts:
        return np.empty(0)
    return np.concatenate(parts)


def fixed_phase_setting(
    tuning: TuningConfiguration,
    branch: Branch = Branch.SQUEEZE,
    delta_t: float = 0.0,
) -> QuadratureSetting:
    return QuadratureSetting(phi_sum=fixed_phase(tuning), delta_t=delta_t, branch=Branch(branch))


def spectrum_terms(
    tuning: TuningConfiguration,
    scales: DerivedScales,
    setting: QuadratureSetting,
    omega: ArrayLike,
    model: ModelVariant = ModelVariant.LINEARIZED,
    *,
    debug_flip_vs: bool = False,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Squared moduli of the +W and -W bracketed terms."""
    detuning = np.asarray(omega, dtype=float)
    at_plus = coefficients(tuning, scales, detuning, model, debug_flip_vs=debug_flip_vs)
    at_minus = coefficients(tuning, scales, -detuning, model, debug_flip_vs=debug_flip_vs)
    phase = np.exp(1j * setting.effective_phase)
    delay = np.exp(1j * detuning * setting.delta_t)
    first = at_plus.u_s - np.conj(at_plus.v_i) * delay * phase
    second = at_minus.u_s - np.conj(at_minus.v_i) * np.conj(delay) * phase
    return np.abs(first) ** 2, np.abs(second) ** 2


def spectrum_general(
    tuning: TuningConfiguration,
    scales: DerivedScales,
    setting: QuadratureSetting,
    omega: ArrayLike,
    model: ModelVariant = ModelVariant.LINEARIZED,
) -> FloatOrArray:
    first, second = spectrum_terms(tuning, scales, setting, omega, model)
    return _as_output(0.5 * (first + second))


def term_balance(
    tuning: TuningConfiguration,
    scales: DerivedScales,
    setting: QuadratureSetting,
    omega: ArrayLike,
    model: ModelVariant = ModelVariant.LINEARIZED,
) -> FloatOrArray:
    """|T+ - T-| / (T+ + T-); zero when the detection delay balances both terms."""
    first, second = spectrum_terms(tuning, scales, setting, omega, model)
    return _as_output(np.abs(first - second) / (first + second))


def optimal_phase(
    tuning: TuningConfiguration,
    scales: DerivedScales,
    omega: ArrayLike,
    model: ModelVariant = ModelVariant.LINEARIZED,
    *,
    keep_beta: bool = False,
) -> FloatOrArray:
    """phi_s + phi_i minimising the +W term: arg[U_s(W) V_i(-W)].

    By default the slow propagation phase beta(W) is removed, which leaves
    k_s l_c + phi_p + arg[sinc gamma(W)]; keep_beta retains it.
    """
    detuning = np.asarray(omega, dtype=float)
    coeffs = coefficients(tuning, scales, detuning, model)
    phase = np.angle(np.asarray(coeffs.u_s) * np.asarray(coeffs.v_i))
    if not keep_beta:
        phase = phase - propagation_beta(tuning, scales, detuning, model)
    return wrap_phase(phase)


def spectrum_optimized(
    tuning: TuningConfiguration,
    scales: DerivedScales,
    omega: ArrayLike,
    model: ModelVariant = ModelVariant.LINEARIZED,
) -> FloatOrArray:
    """Both terms at their per-frequency optimum; (|U_s| - |V_i|)^2 when balanced."""
    detuning = np.asarray(omega, dtype=float)
    at_plus = coefficients(tuning, scales, detuning, model)
    at_minus = coefficients(tuning, scales, -detuning, model)
    first = (np.abs(at_plus.u_s) - np.abs(at_plus.v_i)) ** 2
    second = (np.abs(at_minus.u_s) - np.abs(at_minus.v_i)) ** 2
    return _as_output(0.5 * (first + second))


def spectrum_universal(
    gain: float,
    omega_tilde: ArrayLike,
    branch: Branch = Branch.SQUEEZE,
) -> FloatOrArray:
    """(gamma - g sin gamma) / (gamma + g sin gamma), gamma = sqrt(g^2 + W~^2).

    Written with sinc so that g = 0, W~ = 0 is regular.
    """
    check_below_threshold(gain)
    weighted = gain * sinc(gamma(gain, omega_tilde))
    if Branch(branch) is Branch.ANTISQUEEZE:
        return _as_output((1.0 + weighted) / (1.0 - weighted))
    return _as_output((1.0 - weighted) / (1.0 + weighted))


def _warn_outside_regime(epsilon: float, omega_tilde: NDArray[np.float64]) -> None:
    gain = GAIN_THRESHOLD - epsilon
    if epsilon > APPROX_EPSILON_LIMIT:
        warnings.warn(
            f"near-threshold expansion used at epsilon={epsilon:g} > {APPROX_EPSILON_LIMIT}",
            ApproximationWarning,
            stacklevel=3,
        )
    if np.any(np.abs(omega_tilde) > 0.5 * gain):
        warnings.warn(
            f"near-threshold expansion used at |W/W_gvs| > g/2 = {0.5 * gain:.4g}",
            ApproximationWarning,
            stacklevel=3,
        )


def _near_threshold_denominator(epsilon: float, omega_tilde: ArrayLike) -> NDArray[np.float64]:
    if not epsilon >= 0:
        raise DomainError(f"Distance from threshold epsilon must be >= 0, got {epsilon!r}")
    detuning = np.asarray(omega_tilde, dtype=float)
    _warn_outside_regime(epsilon, detuning)
    return epsilon**2 + (detuning / GAIN_THRESHOLD) ** 2


def near_threshold_squeeze(epsilon: float, omega_tilde: ArrayLike) -> FloatOrArray:
    """1/4 (eps^2 + W~^2 / g_thr^2), valid for eps << 1 and |W~| << g."""
    return _as_output(0.25 * _near_threshold_denominator(epsilon, omega_tilde))


def near_threshold_antisqueeze(epsilon: float, omega_tilde: ArrayLike) -> FloatOrArray:
    """Lorentzian 4 / (eps^2 + W~^2 / g_thr^2); infinite at eps = W~ = 0."""
    denominator = _near_threshold_denominator(epsilon, omega_tilde)
    with np.errstate(divide="ignore"):
        return _as_output(4.0 / denominator)


def antisqueeze_half_width(epsilon: float) -> float:
    """Half width at half maximum of the antisqueezing Lorentzian, in units of W_gvs."""
    if not epsilon >= 0:
        raise DomainError(f"Distance from threshold epsilon must be >= 0, got {epsilon!r}")
    return epsilon * GAIN_THRESHOLD


def squeezing_bandwidth(gain: float, scales: DerivedScales) -> float:
    """W_gvs sqrt(pi^2 - g^2): where sinc gamma changes sign and Sigma crosses 1."""
    if not 0 <= gain < math.pi:
        raise DomainError(f"Squeezing bandwidth needs 0 <= g < pi, got {gain!r}")
    return scales.omega_gvs * math.sqrt(math.pi**2 - gain**2)


def opo_spectrum(pump_gain: float, omega_bar: ArrayLike) -> FloatOrArray:
    """Cavity OPO squeezing spectrum; threshold at pump_gain = 1, omega_bar in linewidths."""
    if not 0 <= pump_gain <= 1:
        raise DomainError(f"OPO cavity gain must lie in [0, 1], got {pump_gain!r}")
    detuning2 = np.asarray(omega_bar, dtype=float) ** 2
    return _as_output(((1.0 - pump_gain) ** 2 + detuning2) / ((1.0 + pump_gain) ** 2 + detuning2))


def opo_near_threshold(epsilon: float, omega_bar: ArrayLike) -> FloatOrArray:
    return _as_output(0.25 * (epsilon**2 + np.asarray(omega_bar, dtype=float) ** 2))


def normalize_peak(values: ArrayLike) -> NDArray[np.float64]:
    """Scale a curve into (0, 1] by its maximum."""
    curve = np.asarray(values, dtype=float)
    peak = float(np.max(curve))
    if not peak > 0:
        raise DomainError("Cannot normalise a curve whose maximum is not positive")
    return curve / peak


def universal_series(
    gain: float,
    grid: NDArray[np.float64],
    branch: Branch = Branch.SQUEEZE,
) -> SpectrumSeries:
    values = np.asarray(spectrum_universal(gain, grid, branch), dtype=float)
    return SpectrumSeries(
        grid=grid,
        values=values,
        metadata={"g": repr(gain), "model": "universal", "branch": Branch(branch).value},
    )


def general_series(
    tuning: TuningConfiguration,
    scales: DerivedScales,
    setting: QuadratureSetting,
    grid: NDArray[np.float64],
    model: ModelVariant = ModelVariant.LINEARIZED,
    *,
    workers: int = 1,
) -> SpectrumSeries:
    """Sample spectrum_general on a grid given in units of W_gvs."""

    def evaluate(chunk: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.asarray(spectrum_general(tuning, scales, setting, chunk * scales.omega_gvs, model))

    values = evaluate_on_grid(evaluate, grid, workers=workers)
    return SpectrumSeries(
        grid=grid,
        values=values,
        metadata={
            "g": repr(tuning.gain),
            "model": ModelVariant(model).value,
            "branch": setting.branch.value,
            "phi_sum": repr(setting.phi_sum),
            "delta_t": repr(setting.delta_t),
        },
    )


def optimized_series(
    tuning: TuningConfiguration,
    scales: DerivedScales,
    grid: NDArray[np.float64],
    model: ModelVariant = ModelVariant.LINEARIZED,
    *,
    workers: int = 1,
) -> SpectrumSeries:
    def evaluate(chunk: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.asarray(spectrum_optimized(tuning, scales, chunk * scales.omega_gvs, model))

    values = evaluate_on_grid(evaluate, grid, workers=workers)
    return SpectrumSeries(
        grid=grid,
        values=values,
        metadata={
            "g": repr(tuning.gain),
            "model": ModelVariant(model).value,
            "branch": Branch.SQUEEZE.value,
            "phi_sum": "optimal",
            "delta_t": "optimal",
        },
    )
