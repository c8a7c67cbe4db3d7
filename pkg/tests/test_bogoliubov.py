from __future__ import annotations

import math

import numpy as np
import pytest

from mopo_squeeze.bogoliubov import (
    GAIN_THRESHOLD,
    ModelVariant,
    coefficients,
    sinc,
    unitarity_residuals,
)
from mopo_squeeze.errors import DomainError, ThresholdError


@pytest.mark.parametrize("model", list(ModelVariant))
@pytest.mark.parametrize("tuning_name", ["degenerate", "nondegenerate"])
def test_unitarity_on_random_samples(request, tuning_name, model, rng):
    tuning, scales = request.getfixturevalue(tuning_name)
    for gain, omega_tilde in zip(rng.uniform(0.0, 1.55, 200), rng.uniform(-20.0, 20.0, 200)):
        at_gain = tuning.with_gain(float(gain))
        omega = float(omega_tilde) * scales.omega_gvs
        residuals = unitarity_residuals(
            coefficients(at_gain, scales, omega, model),
            coefficients(at_gain, scales, -omega, model),
        )
        assert residuals.worst() < 1e-10


def test_vectorised_unitarity(degenerate):
    tuning, scales = degenerate
    omega = np.linspace(-15, 15, 301) * scales.omega_gvs
    at_gain = tuning.with_gain(1.5)
    residuals = unitarity_residuals(
        coefficients(at_gain, scales, omega),
        coefficients(at_gain, scales, -omega),
    )
    assert residuals.norm < 1e-10
    assert residuals.cross < 1e-10
    assert residuals.modulus < 1e-10


def test_zero_frequency_moduli(degenerate):
    tuning, scales = degenerate
    coeffs = coefficients(tuning.with_gain(1.0), scales, 0.0)
    assert abs(coeffs.u_s) == pytest.approx(1 / math.cos(1.0), rel=1e-12)
    assert abs(coeffs.v_s) == pytest.approx(math.tan(1.0), rel=1e-12)
    assert abs(coeffs.v_i) == pytest.approx(math.tan(1.0), rel=1e-12)


@pytest.mark.parametrize(
    ("tuning_name", "model"),
    [("degenerate", ModelVariant.LINEARIZED), ("nondegenerate", ModelVariant.EXACT)],
)
def test_moduli_grow_towards_threshold(request, tuning_name, model):
    tuning, scales = request.getfixturevalue(tuning_name)
    gains = np.linspace(0.0, 1.57, 60)
    u_s = []
    v_s = []
    for gain in gains:
        coeffs = coefficients(tuning.with_gain(float(gain)), scales, 0.0, model)
        u_s.append(abs(coeffs.u_s))
        v_s.append(abs(coeffs.v_s))
    assert np.all(np.diff(u_s) > 0)
    assert np.all(np.diff(v_s) > 0)
    assert u_s[-1] == pytest.approx(1 / math.cos(1.57), rel=1e-6)


def test_no_gain_is_free_propagation(degenerate):
    tuning, scales = degenerate
    coeffs = coefficients(tuning, scales, np.array([0.0, 3 * scales.omega_gvs]))
    assert np.abs(coeffs.u_s) == pytest.approx([1.0, 1.0], rel=1e-12)
    assert np.all(coeffs.v_s == 0)
    assert np.all(coeffs.v_i == 0)


def test_pump_phase_rotates_conversion_terms(degenerate):
    tuning, scales = degenerate
    base = coefficients(tuning.with_gain(0.8), scales, 1e10)
    shifted = coefficients(tuning.with_gain(0.8).with_pump_phase(0.7), scales, 1e10)
    assert shifted.v_i == pytest.approx(base.v_i * np.exp(0.7j), rel=1e-12)
    assert shifted.u_s == pytest.approx(base.u_s, rel=1e-12)


@pytest.mark.parametrize("gain", [GAIN_THRESHOLD, GAIN_THRESHOLD - 1e-10, 2.0])
def test_threshold_rejected(degenerate, gain):
    tuning, scales = degenerate
    with pytest.raises(ThresholdError, match="threshold") as info:
        coefficients(tuning.with_gain(gain), scales, 0.0)
    assert info.value.exit_code == 3


def test_negative_gain_rejected(degenerate):
    tuning, _ = degenerate
    with pytest.raises(DomainError):
        tuning.with_gain(-0.1)


def test_flipped_vs_breaks_cross_relation(degenerate):
    tuning, scales = degenerate
    at_gain = tuning.with_gain(1.2)
    omega = 2 * scales.omega_gvs
    residuals = unitarity_residuals(
        coefficients(at_gain, scales, omega, debug_flip_vs=True),
        coefficients(at_gain, scales, -omega, debug_flip_vs=True),
    )
    assert residuals.cross > 0.1
    assert residuals.norm < 1e-10


def test_sinc_is_regular_at_zero():
    assert sinc(0.0) == 1.0
    assert sinc(math.pi) == pytest.approx(0.0, abs=1e-15)
    assert sinc(np.array([1.0]))[0] == pytest.approx(math.sin(1.0))
