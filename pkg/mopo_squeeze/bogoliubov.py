"""
Input-output coefficients of the MOPO below threshold.

    A_s_out(W)  = U_s(W)  A_s_in(W)  + V_s(W)  A_i_in^+(-W)
    A_i_out(-W) = U_i(-W) A_i_in(-W) + V_i(-W) A_s_in^+(W)

with, for delta = D(W) l_c/2 and gamma = sqrt(g^2 + delta^2),

    phi(W)   = 1 / (cos gamma - i delta sinc gamma)
    U_s(W)   = e^{i k_s l_c} e^{i beta} phi
    V_s(W)   = e^{i (k_s - k_i) l_c} g e^{i phi_p} sinc gamma phi
    U_i(-W)  = e^{i k_i l_c} e^{i beta} phi*
    V_i(-W)  = g e^{i phi_p} sinc gamma phi*

The overbar on D in the source formula for phi is read as plain D.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from mopo_squeeze.dispersion import DerivedScales
from mopo_squeeze.errors import ThresholdError
from mopo_squeeze.phase_matching import (
    TuningConfiguration,
    beta_exact,
    beta_linear,
    half_mismatch_exact,
    half_mismatch_linear,
    propagation_phases,
)

GAIN_THRESHOLD = math.pi / 2.0
THRESHOLD_GUARD = 1e-9

ComplexOrArray = Union[complex, NDArray[np.complex128]]


class ModelVariant(str, Enum):
    EXACT = "exact"
    LINEARIZED = "linearized"


def check_below_threshold(gain: float) -> None:
    if not (math.isfinite(gain) and gain >= 0):
        raise ThresholdError(f"Gain must be finite and >= 0, got {gain!r}")
    if GAIN_THRESHOLD - gain < THRESHOLD_GUARD:
        raise ThresholdError(
            f"Gain g={gain!r} is at or above the MOPO threshold pi/2 "
            f"(guard {THRESHOLD_GUARD:g}); the coefficients diverge there"
        )


def sinc(x: ArrayLike) -> NDArray[np.float64]:
    """sin(x)/x with sinc(0) = 1."""
    return np.sinc(np.asarray(x, dtype=float) / math.pi)


def gamma(gain: float, delta: ArrayLike) -> NDArray[np.float64]:
    return np.hypot(gain, np.asarray(delta, dtype=float))


def _complex_output(values: NDArray[np.complex128]) -> ComplexOrArray:
    if np.ndim(values) == 0:
        return complex(values)
    return values


@dataclass(frozen=True)
class BogoliubovCoefficients:
    """U_s(W), V_s(W), U_i(-W), V_i(-W) at the detuning(s) W in rad/s."""

    detuning: float | NDArray[np.float64]
    u_s: ComplexOrArray
    v_s: ComplexOrArray
    u_i: ComplexOrArray
    v_i: ComplexOrArray


def half_mismatch(
    tuning: TuningConfiguration,
    scales: DerivedScales,
    omega: ArrayLike,
    model: ModelVariant,
) -> NDArray[np.float64]:
    if model is ModelVariant.EXACT:
        return np.asarray(half_mismatch_exact(tuning, omega))
    return np.asarray(half_mismatch_linear(scales, omega))


def propagation_beta(
    tuning: TuningConfiguration,
    scales: DerivedScales,
    omega: ArrayLike,
    model: ModelVariant,
) -> NDArray[np.float64]:
    if model is ModelVariant.EXACT:
        return np.asarray(beta_exact(tuning, omega))
    return np.asarray(beta_linear(scales, omega))


def coefficients(
    tuning: TuningConfiguration,
    scales: DerivedScales,
    omega: ArrayLike,
    model: ModelVariant = ModelVariant.LINEARIZED,
    *,
    debug_flip_vs: bool = False,
) -> BogoliubovCoefficients:
    g = tuning.gain
    check_below_threshold(g)
    model = ModelVariant(model)
    detuning = np.asarray(omega, dtype=float)

    delta = half_mismatch(tuning, scales, detuning, model)
    beta = propagation_beta(tuning, scales, detuning, model)
    gam = gamma(g, delta)
    sinc_gamma = sinc(gam)
    phi = 1.0 / (np.cos(gam) - 1j * delta * sinc_gamma)
    phi_conj = np.conj(phi)

    ks_phase, ki_phase = propagation_phases(tuning)
    pump = g * np.exp(1j * tuning.pump_phase)

    u_s = np.exp(1j * (ks_phase + beta)) * phi
    v_s = np.exp(1j * (ks_phase - ki_phase)) * pump * sinc_gamma * phi
    u_i = np.exp(1j * (ki_phase + beta)) * phi_conj
    v_i = pump * sinc_gamma * phi_conj
    if debug_flip_vs:
        v_s = -v_s

    return BogoliubovCoefficients(
        detuning=float(detuning) if detuning.ndim == 0 else detuning,
        u_s=_complex_output(u_s),
        v_s=_complex_output(v_s),
        u_i=_complex_output(u_i),
        v_i=_complex_output(v_i),
    )


class UnitarityResiduals(NamedTuple):
    norm: float
    cross: float
    modulus: float

    def worst(self) -> float:
        return max(self)


def unitarity_residuals(
    at_plus: BogoliubovCoefficients,
    at_minus: BogoliubovCoefficients,
) -> UnitarityResiduals:
    """Largest violation over both coefficient sets of

    |U_s|^2 - |V_s|^2 = 1 and |U_i|^2 - |V_i|^2 = 1   (norm)
    U_s(W) V_i(-W) = U_i(-W) V_s(W)                  (cross)
    |V_s(W)| = |V_i(-W)|                             (modulus)
    """
    norm = 0.0
    cross = 0.0
    modulus = 0.0
    for coeffs in (at_plus, at_minus):
        u_s = np.asarray(coeffs.u_s)
        v_s = np.asarray(coeffs.v_s)
        u_i = np.asarray(coeffs.u_i)
        v_i = np.asarray(coeffs.v_i)
        norm = max(
            norm,
            float(np.max(np.abs(np.abs(u_s) ** 2 - np.abs(v_s) ** 2 - 1.0))),
            float(np.max(np.abs(np.abs(u_i) ** 2 - np.abs(v_i) ** 2 - 1.0))),
        )
        cross = max(cross, float(np.max(np.abs(u_s * v_i - u_i * v_s))))
        modulus = max(modulus, float(np.max(np.abs(np.abs(v_s) - np.abs(v_i)))))
    return UnitarityResiduals(norm=norm, cross=cross, modulus=modulus)
