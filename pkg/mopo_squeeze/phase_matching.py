"""
Quasi-phase-matching for backward (counter-propagating idler) PDC.

QPM condition: k_s - k_i = k_p - m 2pi/Lambda. The exact phase mismatch of a
frequency-conjugate pair (omega_s + W, omega_i - W) is

    D(W) = k_s(W) - k_i(-W) - k_p + k_G,      k_G = m 2pi/Lambda

and the global propagation phase is

    beta(W) = [k_s(W) + k_i(-W) - (k_s + k_i)] l_c / 2.

Their first-order forms are D l_c/2 ~ W tau_gvs and beta ~ W tau_gvm.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import bisect

from mopo_squeeze.dispersion import (
    DerivedScales,
    FloatOrArray,
    SellmeierMaterial,
    _as_output,
    angular_frequency,
    derived_scales,
    wavenumber,
)
from mopo_squeeze.errors import DomainError, NoRootError, NumericError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
ENERGY_RTOL = 1e-12
SOLVER_MAX_ITER = 200
SOLVER_XTOL = 1e-21  # metres; the relative tolerance of bisect dominates
RESIDUAL_TOLERANCE = 1e-6  # fraction of 2pi/Lambda


def wrap_phase(phase: ArrayLike) -> FloatOrArray:
    """Reduce to (-pi, pi]."""
    values = np.asarray(phase, dtype=float)
    return _as_output(math.pi - np.mod(math.pi - values, TWO_PI))


def idler_wavelength(lambda_p: float, lambda_s: float) -> float:
    if not lambda_s > lambda_p > 0:
        raise DomainError(
            f"Signal wavelength {lambda_s!r} m must exceed the pump wavelength {lambda_p!r} m"
        )
    return 1.0 / (1.0 / lambda_p - 1.0 / lambda_s)


@dataclass(frozen=True)
class TuningConfiguration:
    material: SellmeierMaterial
    lambda_p: float
    lambda_s: float
    lambda_i: float
    poling_period: float
    m_order: int = 1
    crystal_length: float = 1e-2
    gain: float = 0.0
    pump_phase: float = 0.0

    def __post_init__(self) -> None:
        inverse_p = 1.0 / self.lambda_p
        imbalance = inverse_p - 1.0 / self.lambda_s - 1.0 / self.lambda_i
        if abs(imbalance) > ENERGY_RTOL * inverse_p:
            raise DomainError(
                "Energy conservation violated: 1/lambda_p != 1/lambda_s + 1/lambda_i "
                f"(relative error {abs(imbalance) / inverse_p:.3g})"
            )
        if self.m_order < 1 or self.m_order % 2 == 0:
            raise DomainError(f"QPM order must be odd and positive, got {self.m_order}")
        if not self.poling_period > 0:
            raise DomainError(f"Poling period must be > 0, got {self.poling_period!r}")
        if not self.crystal_length > 0:
            raise DomainError(f"Crystal length must be > 0, got {self.crystal_length!r}")
        if not (math.isfinite(self.gain) and self.gain >= 0):
            raise DomainError(f"Gain must be finite and >= 0, got {self.gain!r}")

    @classmethod
    def solved(
        cls,
        material: SellmeierMaterial,
        lambda_p: float,
        lambda_s: float,
        *,
        m_order: int = 1,
        crystal_length: float = 1e-2,
        gain: float = 0.0,
        pump_phase: float = 0.0,
    ) -> "TuningConfiguration":
        """Tuning whose poling period phase-matches the given signal wavelength."""
        lambda_i = idler_wavelength(lambda_p, lambda_s)
        period = poling_period(material, lambda_p, lambda_s, m_order)
        return cls(
            material=material,
            lambda_p=lambda_p,
            lambda_s=lambda_s,
            lambda_i=lambda_i,
            poling_period=period,
            m_order=m_order,
            crystal_length=crystal_length,
            gain=gain,
            pump_phase=pump_phase,
        )

    @classmethod
    def degenerate(
        cls,
        material: SellmeierMaterial,
        lambda_p: float,
        *,
        m_order: int = 1,
        crystal_length: float = 1e-2,
        gain: float = 0.0,
        pump_phase: float = 0.0,
    ) -> "TuningConfiguration":
        """Type-0 degenerate tuning, lambda_s = lambda_i = 2 lambda_p exactly."""
        lambda_s = 2.0 * lambda_p
        return cls(
            material=material,
            lambda_p=lambda_p,
            lambda_s=lambda_s,
            lambda_i=lambda_s,
            poling_period=poling_period(material, lambda_p, lambda_s, m_order),
            m_order=m_order,
            crystal_length=crystal_length,
            gain=gain,
            pump_phase=pump_phase,
        )

    @property
    def omega_p(self) -> float:
        return float(angular_frequency(self.lambda_p))

    @property
    def omega_s(self) -> float:
        return float(angular_frequency(self.lambda_s))

    @property
    def omega_i(self) -> float:
        return float(angular_frequency(self.lambda_i))

    @property
    def k_grating(self) -> float:
        return self.m_order * (TWO_PI / self.poling_period)

    @property
    def is_degenerate(self) -> bool:
        return self.lambda_s == self.lambda_i

    def with_gain(self, gain: float) -> "TuningConfiguration":
        return replace(self, gain=gain)

    def with_pump_phase(self, pump_phase: float) -> "TuningConfiguration":
        return replace(self, pump_phase=pump_phase)


def poling_period(
    material: SellmeierMaterial,
    lambda_p: float,
    lambda_s: float,
    m_order: int = 1,
) -> float:
    omega_p = float(angular_frequency(lambda_p))
    omega_s = float(angular_frequency(lambda_s))
    omega_i = omega_p - omega_s
    if not omega_i > 0:
        raise DomainError(f"No idler: signal {lambda_s!r} m is not longer than pump {lambda_p!r} m")
    k_p = float(wavenumber(material, omega_p))
    k_s = float(wavenumber(material, omega_s))
    k_i = float(wavenumber(material, omega_i))
    denominator = k_p - k_s + k_i
    if not denominator > 0:
        raise DomainError(
            f"Backward QPM impossible for {material.name} at lambda_p={lambda_p!r} m, "
            f"lambda_s={lambda_s!r} m: k_p - k_s + k_i = {denominator:.6g} rad/m"
        )
    return m_order * (TWO_PI / denominator)


def qpm_residual(
    material: SellmeierMaterial,
    lambda_p: float,
    lambda_s: float,
    period: float,
    m_order: int = 1,
) -> float:
    """k_s - k_i - k_p + m 2pi/Lambda, zero on the tuning curve."""
    omega_p = float(angular_frequency(lambda_p))
    omega_s = float(angular_frequency(lambda_s))
    k_p = float(wavenumber(material, omega_p))
    k_s = float(wavenumber(material, omega_s))
    k_i = float(wavenumber(material, omega_p - omega_s))
    return k_s - k_i - k_p + m_order * (TWO_PI / period)


def solve_signal_wavelength(
    material: SellmeierMaterial,
    lambda_p: float,
    period: float,
    m_order: int,
    bracket: tuple[float, float],
) -> float:
    low, high = sorted(bracket)

    def residual(lambda_s: float) -> float:
        return qpm_residual(material, lambda_p, lambda_s, period, m_order)

    f_low = residual(low)
    f_high = residual(high)
    if f_low == 0.0:
        return low
    if f_high == 0.0:
        return high
    if math.copysign(1.0, f_low) == math.copysign(1.0, f_high):
        raise NoRootError(
            f"QPM residual does not change sign on [{low * 1e9:.4f}, {high * 1e9:.4f}] nm "
            f"for Lambda={period * 1e9:.4f} nm ({f_low:.4g}, {f_high:.4g} rad/m)"
        )

    root, result = bisect(
        residual,
        low,
        high,
        xtol=SOLVER_XTOL,
        maxiter=SOLVER_MAX_ITER,
        full_output=True,
        disp=False,
    )
    if not result.converged:
        raise NumericError(
            f"Bisection did not converge after {result.iterations} iterations ({result.flag})"
        )
    final = residual(root)
    tolerance = RESIDUAL_TOLERANCE * TWO_PI / period
    if abs(final) >= tolerance:
        raise NumericError(
            f"QPM residual {final:.4g} rad/m at lambda_s={root!r} m exceeds {tolerance:.4g} rad/m"
        )
    logger.debug("Solved lambda_s=%.9g m in %d iterations", root, result.iterations)
    return float(root)


def _detuned_wavenumber_steps(
    tuning: TuningConfiguration,
    omega: ArrayLike,
) -> tuple[np.ndarray, np.ndarray]:
    """k_s(omega_s + W) - k_s and k_i(omega_i - W) - k_i."""
    detuning = np.asarray(omega, dtype=float)
    material = tuning.material
    omega_s = tuning.omega_s
    omega_i = tuning.omega_i
    k_s = float(wavenumber(material, omega_s))
    k_i = float(wavenumber(material, omega_i))
    step_s = np.asarray(wavenumber(material, omega_s + detuning)) - k_s
    step_i = np.asarray(wavenumber(material, omega_i - detuning)) - k_i
    return step_s, step_i


def mismatch_at_centre(tuning: TuningConfiguration) -> float:
    material = tuning.material
    k_p = float(wavenumber(material, tuning.omega_p))
    k_s = float(wavenumber(material, tuning.omega_s))
    k_i = float(wavenumber(material, tuning.omega_i))
    return k_s - k_i - k_p + tuning.k_grating


def mismatch_exact(tuning: TuningConfiguration, omega: ArrayLike) -> FloatOrArray:
    step_s, step_i = _detuned_wavenumber_steps(tuning, omega)
    return _as_output(step_s - step_i + mismatch_at_centre(tuning))


def mismatch_linear(scales: DerivedScales, omega: ArrayLike) -> FloatOrArray:
    return _as_output((scales.kprime_s + scales.kprime_i) * np.asarray(omega, dtype=float))


def half_mismatch_exact(tuning: TuningConfiguration, omega: ArrayLike) -> FloatOrArray:
    """D(W) l_c / 2, the mismatch entering gamma."""
    return _as_output(0.5 * tuning.crystal_length * np.asarray(mismatch_exact(tuning, omega)))


def half_mismatch_linear(scales: DerivedScales, omega: ArrayLike) -> FloatOrArray:
    return _as_output(np.asarray(omega, dtype=float) * scales.tau_gvs)


def beta_exact(tuning: TuningConfiguration, omega: ArrayLike) -> FloatOrArray:
    step_s, step_i = _detuned_wavenumber_steps(tuning, omega)
    return _as_output(0.5 * tuning.crystal_length * (step_s + step_i))


def beta_linear(scales: DerivedScales, omega: ArrayLike) -> FloatOrArray:
    detuning = np.asarray(omega, dtype=float)
    if scales.gvm_unbounded:
        return _as_output(np.zeros_like(detuning))
    return _as_output(detuning * scales.tau_gvm)


def propagation_phases(tuning: TuningConfiguration) -> tuple[float, float]:
    """k_s l_c and k_i l_c reduced modulo 2pi."""
    k_s = float(wavenumber(tuning.material, tuning.omega_s))
    k_i = float(wavenumber(tuning.material, tuning.omega_i))
    return (
        math.fmod(k_s * tuning.crystal_length, TWO_PI),
        math.fmod(k_i * tuning.crystal_length, TWO_PI),
    )


def fixed_phase(tuning: TuningConfiguration) -> float:
    """phi_s + phi_i = k_s l_c + phi_p, the zero-frequency optimum."""
    ks_phase, _ = propagation_phases(tuning)
    return float(wrap_phase(ks_phase + tuning.pump_phase))


def tuning_curve(
    material: SellmeierMaterial,
    lambda_p: float,
    signal_wavelengths: ArrayLike,
    *,
    crystal_length: float = 1e-2,
    m_order: int = 1,
) -> list[tuple[TuningConfiguration, DerivedScales]]:
    """Phase-matched tunings (Lambda chosen per signal wavelength) and their scales."""
    points: list[tuple[TuningConfiguration, DerivedScales]] = []
    for lambda_s in np.asarray(signal_wavelengths, dtype=float):
        if math.isclose(lambda_s, 2.0 * lambda_p, rel_tol=1e-12):
            tuning = TuningConfiguration.degenerate(
                material, lambda_p, m_order=m_order, crystal_length=crystal_length
            )
        else:
            tuning = TuningConfiguration.solved(
                material,
                lambda_p,
                float(lambda_s),
                m_order=m_order,
                crystal_length=crystal_length,
            )
        points.append((tuning, derived_scales(tuning)))
    return points
