from __future__ import annotations

import json
import math
from pathlib import Path

import pytest

from mopo_squeeze.config import FIGURE_GAINS, MopoSettings, RunConfig
from mopo_squeeze.errors import ConfigError


def test_settings_defaults():
    settings = MopoSettings.from_env()
    assert settings.output_dir == ".tmp/mopo"
    assert settings.workers == 1
    assert settings.log_level == "INFO"
    assert settings.debug_flip_vs is False
    assert settings.materials_path is None


def test_settings_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("MOPO_MATERIALS_DIR", str(tmp_path))
    monkeypatch.setenv("MOPO_WORKERS", "4")
    monkeypatch.setenv("MOPO_LOG_LEVEL", "debug")
    monkeypatch.setenv("MOPO_DEBUG_FLIP_VS", "yes")
    settings = MopoSettings.from_env()
    assert settings.materials_path == tmp_path
    assert settings.workers == 4
    assert settings.log_level == "DEBUG"
    assert settings.debug_flip_vs is True


def test_bad_worker_count_falls_back(monkeypatch):
    monkeypatch.setenv("MOPO_WORKERS", "many")
    assert MopoSettings.from_env().workers == 1


def test_defaults_reproduce_figure_setup():
    config = RunConfig().validate()
    assert config.degenerate
    assert config.pump_wavelength == 800e-9
    assert config.crystal_length == 1e-2
    assert config.all_gains == FIGURE_GAINS


def test_mapping_converts_human_units():
    config = RunConfig.from_mapping(
        {
            "pump_wavelength_nm": 800,
            "signal_wavelength_nm": 1300,
            "crystal_length_mm": 5,
            "gains": "1.0, 1.5",
            "models": "exact,linearized",
            "phase": "0.25",
            "delta_t": "tau_gvm",
        }
    )
    assert config.signal_wavelength == pytest.approx(1.3e-6)
    assert config.crystal_length == pytest.approx(5e-3)
    assert config.gains == (1.0, 1.5)
    assert config.models == ("exact", "linearized")
    assert config.phase == 0.25
    assert config.delta_t == "tau_gvm"


def test_epsilons_replace_default_gains():
    config = RunConfig.from_mapping({"epsilons": [0.1, 0.05]})
    assert config.gains == ()
    assert config.all_gains == pytest.approx((math.pi / 2 - 0.1, math.pi / 2 - 0.05))


def test_epsilon_flag_alone_replaces_file_gains():
    base = RunConfig.from_mapping({"gains": [1.0, 1.2]})
    merged = base.with_overrides({"gains": None, "epsilons": "0.1"})
    assert merged.gains == ()
    assert merged.all_gains == pytest.approx((math.pi / 2 - 0.1,))


def test_epsilon_flag_combines_with_gain_flag():
    base = RunConfig.from_mapping({"gains": [1.0, 1.2]})
    merged = base.with_overrides({"gains": "1.4", "epsilons": "0.1"})
    assert merged.all_gains == pytest.approx((1.4, math.pi / 2 - 0.1))


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="colour"):
        RunConfig.from_mapping({"colour": "blue"})


@pytest.mark.parametrize(
    "mapping",
    [
        {"gains": [math.pi / 2]},
        {"points": 100},
        {"span": -1},
        {"models": "quantum"},
        {"qpm_order": 2},
        {"signal_wavelength_nm": 700},
        {"branch": "sideways"},
    ],
)
def test_validation_errors(mapping):
    with pytest.raises(ConfigError):
        RunConfig.from_mapping(mapping).validate()


def test_invalid_phase_mode():
    with pytest.raises(ConfigError, match="phase"):
        RunConfig.from_mapping({"phase": "best"})


def test_overrides_ignore_missing_flags():
    base = RunConfig.from_mapping({"gains": [1.0], "points": 201})
    merged = base.with_overrides({"gains": None, "points": 301, "signal_wavelength_nm": None})
    assert merged.gains == (1.0,)
    assert merged.points == 301
    assert merged.degenerate


def test_json_file(tmp_path):
    path = tmp_path / "job.json"
    path.write_text(json.dumps({"material": "linbo3_mgo5_e", "output_dir": "out"}), encoding="utf-8")
    config = RunConfig.from_json_file(path)
    assert config.material == "linbo3_mgo5_e"
    assert config.output_dir == Path("out")


def test_json_file_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        RunConfig.from_json_file(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError, match="not valid JSON"):
        RunConfig.from_json_file(broken)
    listed = tmp_path / "list.json"
    listed.write_text("[]", encoding="utf-8")
    with pytest.raises(ConfigError, match="JSON object"):
        RunConfig.from_json_file(listed)


def test_describe_records_tuning():
    meta = RunConfig().describe()
    assert meta["lambda_s"] == "degenerate"
    assert meta["l_c"] == "0.01"
