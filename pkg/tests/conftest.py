from __future__ import annotations

import numpy as np
import pytest

from mopo_squeeze.config import MopoSettings
from mopo_squeeze.dispersion import DEFAULT_MATERIAL, derived_scales, load_material
from mopo_squeeze.phase_matching import TuningConfiguration

PUMP = 800e-9
SIGNAL = 1.3e-6


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("MOPO_MATERIALS_DIR", "MOPO_OUTPUT_DIR", "MOPO_WORKERS", "MOPO_LOG_LEVEL", "MOPO_DEBUG_FLIP_VS"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def material():
    return load_material(DEFAULT_MATERIAL)


@pytest.fixture
def degenerate(material):
    tuning = TuningConfiguration.degenerate(material, PUMP)
    return tuning, derived_scales(tuning)


@pytest.fixture
def nondegenerate(material):
    tuning = TuningConfiguration.solved(material, PUMP, SIGNAL)
    return tuning, derived_scales(tuning)


@pytest.fixture
def settings(tmp_path):
    return MopoSettings(
        materials_dir="",
        output_dir=str(tmp_path / "out"),
        workers=1,
        log_level="INFO",
        debug_flip_vs=False,
    )
