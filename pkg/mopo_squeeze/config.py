from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from mopo_squeeze.bogoliubov import GAIN_THRESHOLD, THRESHOLD_GUARD, ModelVariant
from mopo_squeeze.dispersion import DEFAULT_MATERIAL
from mopo_squeeze.errors import ConfigError
from mopo_squeeze.spectra import Branch

# fig2/fig3 curves: from 36% below threshold up to near-critical.
FIGURE_GAINS: tuple[float, ...] = (1.0, 1.2, 1.4, 1.5, 1.55)

_PHASE_MODES = {"fixed", "optimal"}
_DELTA_T_MODES = {"zero", "tau_gvm"}


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name, str(default)).strip()
    try:
        return int(raw)
    except ValueError:
        return default


def _env_bool(name: str, default: bool) -> bool:
    raw = os.getenv(name, "").strip()
    if raw == "":
        return default
    return raw.lower() in {"1", "true", "yes", "y", "on"}


@dataclass(frozen=True)
class MopoSettings:
    materials_dir: str
    output_dir: str
    workers: int
    log_level: str
    debug_flip_vs: bool

    @staticmethod
    def from_env() -> "MopoSettings":
        return MopoSettings(
            materials_dir=os.getenv("MOPO_MATERIALS_DIR", "").strip(),
            output_dir=os.getenv("MOPO_OUTPUT_DIR", ".tmp/mopo").strip(),
            workers=max(1, _env_int("MOPO_WORKERS", 1)),
            log_level=os.getenv("MOPO_LOG_LEVEL", "INFO").strip().upper() or "INFO",
            debug_flip_vs=_env_bool("MOPO_DEBUG_FLIP_VS", False),
        )

    @property
    def materials_path(self) -> Path | None:
        return Path(self.materials_dir) if self.materials_dir else None


def _parse_float_list(value: Any, key: str) -> tuple[float, ...]:
    if isinstance(value, str):
        tokens = [token.strip() for token in value.split(",") if token.strip()]
    elif isinstance(value, (list, tuple)):
        tokens = list(value)
    else:
        tokens = [value]
    try:
        return tuple(float(token) for token in tokens)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a list of numbers, got {value!r}") from None


def _parse_mode_or_float(value: Any, modes: set[str], key: str) -> str | float:
    if isinstance(value, str) and value.strip().lower() in modes:
        return value.strip().lower()
    try:
        return float(value)
    except (TypeError, ValueError):
        allowed = "|".join(sorted(modes))
        raise ConfigError(f"{key} must be {allowed} or a number, got {value!r}") from None


@dataclass(frozen=True)
class RunConfig:
    """One figure or sweep job, in SI units (wavelengths and lengths in m)."""

    material: str = DEFAULT_MATERIAL
    pump_wavelength: float = 800e-9
    signal_wavelength: float | None = None
    crystal_length: float = 1e-2
    qpm_order: int = 1
    pump_phase: float = 0.0
    gains: tuple[float, ...] = FIGURE_GAINS
    epsilons: tuple[float, ...] = ()
    models: tuple[str, ...] = (ModelVariant.LINEARIZED.value,)
    phase: str | float = "fixed"
    branch: str = Branch.SQUEEZE.value
    delta_t: str | float = "zero"
    span: float = 5.0
    points: int = 1001
    output_dir: Path = field(default_factory=lambda: Path(".tmp/mopo"))

    @property
    def degenerate(self) -> bool:
        return self.signal_wavelength is None

    @property
    def all_gains(self) -> tuple[float, ...]:
        return self.gains + tuple(GAIN_THRESHOLD - eps for eps in self.epsilons)

    @classmethod
    def from_mapping(cls, data: dict[str, Any]) -> "RunConfig":
        """Build from human units: nm for wavelengths, mm for the crystal."""
        known = {
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
        }
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown config keys: {', '.join(unknown)}")

        values: dict[str, Any] = {}
        try:
            if "material" in data:
                values["material"] = str(data["material"]).strip()
            if "pump_wavelength_nm" in data:
                values["pump_wavelength"] = float(data["pump_wavelength_nm"]) * 1e-9
            if "signal_wavelength_nm" in data:
                raw = data["signal_wavelength_nm"]
                if raw is None or str(raw).strip().lower() == "degenerate":
                    values["signal_wavelength"] = None
                else:
                    values["signal_wavelength"] = float(raw) * 1e-9
            if "crystal_length_mm" in data:
                values["crystal_length"] = float(data["crystal_length_mm"]) * 1e-3
            if "qpm_order" in data:
                values["qpm_order"] = int(data["qpm_order"])
            if "pump_phase" in data:
                values["pump_phase"] = float(data["pump_phase"])
            if "span" in data:
                values["span"] = float(data["span"])
            if "points" in data:
                values["points"] = int(data["points"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"Invalid numeric config value: {exc}") from None

        if "gains" in data:
            values["gains"] = _parse_float_list(data["gains"], "gains")
        if "epsilons" in data:
            values["epsilons"] = _parse_float_list(data["epsilons"], "epsilons")
            if "gains" not in data:
                values["gains"] = ()
        if "models" in data:
            raw_models = data["models"]
            if isinstance(raw_models, str):
                raw_models = raw_models.split(",")
            values["models"] = tuple(str(model).strip().lower() for model in raw_models)
        if "phase" in data:
            values["phase"] = _parse_mode_or_float(data["phase"], _PHASE_MODES, "phase")
        if "branch" in data:
            values["branch"] = str(data["branch"]).strip().lower()
        if "delta_t" in data:
            values["delta_t"] = _parse_mode_or_float(data["delta_t"], _DELTA_T_MODES, "delta_t")
        if "output_dir" in data:
            values["output_dir"] = Path(str(data["output_dir"]))
        return replace(cls(), **values)

    @classmethod
    def from_json_file(cls, path: Path) -> "RunConfig":
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"Config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"Config file {path} is not valid JSON: {exc}") from None
        if not isinstance(payload, dict):
            raise ConfigError(f"Config file {path} must hold a JSON object.")
        return cls.from_mapping(payload)

    def with_overrides(self, overrides: dict[str, Any]) -> "RunConfig":
        """Flags win over file values; None means the flag was not given."""
        present = {key: value for key, value in overrides.items() if value is not None}
        if not present:
            return self
        merged = RunConfig.from_mapping(present)
        return replace(self, **{name: getattr(merged, name) for name in _field_names(present)})

    def validate(self) -> "RunConfig":
        if self.points < 3 or self.points % 2 == 0:
            raise ConfigError(f"points must be odd and >= 3, got {self.points}")
        if not self.span > 0:
            raise ConfigError(f"span must be > 0, got {self.span}")
        if not self.all_gains:
            raise ConfigError("At least one gain or epsilon is required.")
        for gain in self.all_gains:
            if not math.isfinite(gain) or gain < 0:
                raise ConfigError(f"Gain must be a finite value >= 0, got {gain!r}")
            if GAIN_THRESHOLD - gain < THRESHOLD_GUARD:
                raise ConfigError(
                    f"Gain {gain!r} is not below the MOPO threshold pi/2 by at least {THRESHOLD_GUARD:g}"
                )
        if not self.models:
            raise ConfigError("At least one model is required.")
        valid_models = {variant.value for variant in ModelVariant}
        for model in self.models:
            if model not in valid_models:
                raise ConfigError(f"Unknown model {model!r}; expected one of {sorted(valid_models)}")
        if self.branch not in {branch.value for branch in Branch}:
            raise ConfigError(f"Unknown branch {self.branch!r}; expected squeeze|antisqueeze")
        if self.qpm_order < 1 or self.qpm_order % 2 == 0:
            raise ConfigError(f"qpm_order must be an odd positive integer, got {self.qpm_order}")
        if not self.crystal_length > 0:
            raise ConfigError(f"crystal length must be > 0, got {self.crystal_length}")
        if not self.pump_wavelength > 0:
            raise ConfigError(f"pump wavelength must be > 0, got {self.pump_wavelength}")
        if self.signal_wavelength is not None and not self.signal_wavelength > self.pump_wavelength:
            raise ConfigError("signal wavelength must be longer than the pump wavelength")
        return self

    def describe(self) -> dict[str, str]:
        return {
            "material": self.material,
            "lambda_p": repr(self.pump_wavelength),
            "lambda_s": "degenerate" if self.degenerate else repr(self.signal_wavelength),
            "l_c": repr(self.crystal_length),
            "m_order": str(self.qpm_order),
            "phi_p": repr(self.pump_phase),
        }


_MAPPING_TO_FIELD = {
    "pump_wavelength_nm": "pump_wavelength",
    "signal_wavelength_nm": "signal_wavelength",
    "crystal_length_mm": "crystal_length",
}


def _field_names(mapping: dict[str, Any]) -> list[str]:
    names = [_MAPPING_TO_FIELD.get(key, key) for key in mapping]
    if "epsilons" in mapping and "gains" not in mapping:
        names.append("gains")
    return names
