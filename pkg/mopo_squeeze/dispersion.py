"""
Refractive index, wavenumber and inverse group velocity from Sellmeier tables.

Materials live in `materials/*.material` files (python-dotenv key=value syntax,
`#` comments carry the provenance). Coefficients take the vacuum wavelength in
micrometres; everything crossing this module's API is SI: wavelengths in m,
angular frequencies in rad/s, wavenumbers in rad/m, k' in s/m.

Formula variants:
  sellmeier     n^2 = A + sum_j B_j L^2 / (L^2 - C_j)   COEFFICIENTS=A,B1,C1,B2,C2,...
  sellmeier_ir  n^2 = A + B / (L^2 - C) - D L^2          COEFFICIENTS=A,B,C,D
  constant      n   = N                                  COEFFICIENTS=N
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import TYPE_CHECKING, Union

import numpy as np
from dotenv import dotenv_values
from numpy.typing import ArrayLike, NDArray
from scipy.constants import c as SPEED_OF_LIGHT

from mopo_squeeze.errors import ConfigError, DomainError, MaterialNotFoundError

if TYPE_CHECKING:
    from mopo_squeeze.phase_matching import TuningConfiguration

logger = logging.getLogger(__name__)

FloatOrArray = Union[float, NDArray[np.float64]]

BUNDLED_MATERIALS_DIR = Path(__file__).resolve().parent / "materials"
MATERIAL_SUFFIX = ".material"
DEFAULT_MATERIAL = "linbo3_congruent_e"

# Relative distance from the validity edges required by inverse_group_velocity.
DIFFERENTIATION_MARGIN = 1e-4
# |k'_s - k'_i| below this fraction of k'_s + k'_i counts as degenerate.
DEGENERACY_RTOL = 1e-12

_REQUIRED_KEYS = (
    "NAME",
    "FORMULA",
    "COEFFICIENTS",
    "WAVELENGTH_MIN_UM",
    "WAVELENGTH_MAX_UM",
)


class FormulaVariant(str, Enum):
    SELLMEIER = "sellmeier"
    SELLMEIER_IR = "sellmeier_ir"
    CONSTANT = "constant"


def angular_frequency(wavelength: ArrayLike) -> FloatOrArray:
    return _as_output(2.0 * math.pi * SPEED_OF_LIGHT / np.asarray(wavelength, dtype=float))


def vacuum_wavelength(omega: ArrayLike) -> FloatOrArray:
    return _as_output(2.0 * math.pi * SPEED_OF_LIGHT / np.asarray(omega, dtype=float))


def _as_output(values: NDArray[np.float64]) -> FloatOrArray:
    if np.ndim(values) == 0:
        return float(values)
    return values


@dataclass(frozen=True)
class SellmeierMaterial:
    name: str
    formula: FormulaVariant
    coefficients: tuple[float, ...]
    wavelength_min: float
    wavelength_max: float
    axis: str = ""
    temperature_c: float | None = None
    provenance: str = ""

    def __post_init__(self) -> None:
        count = len(self.coefficients)
        if self.formula is FormulaVariant.SELLMEIER and (count < 3 or count % 2 == 0):
            raise ConfigError(
                f"Material {self.name}: sellmeier needs A followed by (B, C) pairs, got {count} values"
            )
        if self.formula is FormulaVariant.SELLMEIER_IR and count != 4:
            raise ConfigError(f"Material {self.name}: sellmeier_ir needs 4 coefficients, got {count}")
        if self.formula is FormulaVariant.CONSTANT and (count != 1 or self.coefficients[0] < 1.0):
            raise ConfigError(f"Material {self.name}: constant needs one index >= 1")
        if not 0 < self.wavelength_min < self.wavelength_max:
            raise ConfigError(
                f"Material {self.name}: invalid validity range "
                f"[{self.wavelength_min!r}, {self.wavelength_max!r}]"
            )

    def range_text(self) -> str:
        return f"{self.wavelength_min * 1e6:g}-{self.wavelength_max * 1e6:g} um"

    def index_squared(self, wavelength_um: NDArray[np.float64]) -> tuple[NDArray, NDArray]:
        """n^2 and d(n^2)/dL with L in micrometres."""
        lam = wavelength_um
        lam2 = lam * lam
        coeffs = self.coefficients
        if self.formula is FormulaVariant.CONSTANT:
            n2 = np.full_like(lam, coeffs[0] ** 2)
            return n2, np.zeros_like(lam)
        if self.formula is FormulaVariant.SELLMEIER_IR:
            a, b, c, d = coeffs
            denom = lam2 - c
            n2 = a + b / denom - d * lam2
            dn2 = -2.0 * b * lam / (denom * denom) - 2.0 * d * lam
            return n2, dn2

        n2 = np.full_like(lam, coeffs[0])
        dn2 = np.zeros_like(lam)
        for b, c in zip(coeffs[1::2], coeffs[2::2]):
            denom = lam2 - c
            n2 = n2 + b * lam2 / denom
            dn2 = dn2 - 2.0 * b * c * lam / (denom * denom)
        return n2, dn2


def _check_validity(
    material: SellmeierMaterial,
    wavelength: NDArray[np.float64],
    *,
    margin: float = 0.0,
) -> None:
    lower = material.wavelength_min * (1.0 + margin)
    upper = material.wavelength_max * (1.0 - margin)
    if not np.all(np.isfinite(wavelength)) or np.any(wavelength < lower) or np.any(wavelength > upper):
        bad = wavelength[(wavelength < lower) | (wavelength > upper) | ~np.isfinite(wavelength)]
        detail = f"{float(bad.flat[0]) * 1e6:.6g} um" if bad.size else "non-finite wavelength"
        suffix = f" with relative margin {margin:g}" if margin else ""
        raise DomainError(
            f"Material {material.name} is valid for {material.range_text()}{suffix}; got {detail}"
        )


def _index_and_slope(
    material: SellmeierMaterial,
    wavelength: NDArray[np.float64],
) -> tuple[NDArray, NDArray]:
    n2, dn2 = material.index_squared(wavelength * 1e6)
    if np.any(n2 <= 0):
        raise DomainError(f"Material {material.name}: Sellmeier formula gives n^2 <= 0")
    n = np.sqrt(n2)
    return n, dn2 / (2.0 * n)


def refractive_index(material: SellmeierMaterial, wavelength: ArrayLike) -> FloatOrArray:
    lam = np.asarray(wavelength, dtype=float)
    _check_validity(material, lam)
    n, _ = _index_and_slope(material, lam)
    return _as_output(n)


def wavenumber(material: SellmeierMaterial, omega: ArrayLike) -> FloatOrArray:
    w = np.asarray(omega, dtype=float)
    lam = 2.0 * math.pi * SPEED_OF_LIGHT / w
    _check_validity(material, lam)
    n, _ = _index_and_slope(material, lam)
    return _as_output(w * n / SPEED_OF_LIGHT)


def group_index(material: SellmeierMaterial, omega: ArrayLike) -> FloatOrArray:
    w = np.asarray(omega, dtype=float)
    lam = 2.0 * math.pi * SPEED_OF_LIGHT / w
    _check_validity(material, lam, margin=DIFFERENTIATION_MARGIN)
    n, dn_dlam_um = _index_and_slope(material, lam)
    return _as_output(n - lam * 1e6 * dn_dlam_um)


def inverse_group_velocity(material: SellmeierMaterial, omega: ArrayLike) -> FloatOrArray:
    """k' = dk/domega = (n - L dn/dL) / c, from the differentiated formula."""
    return _as_output(np.asarray(group_index(material, omega)) / SPEED_OF_LIGHT)


def _materials_dirs(directory: Path | None) -> list[Path]:
    dirs = [BUNDLED_MATERIALS_DIR]
    if directory is not None:
        dirs.insert(0, Path(directory))
    return dirs


def list_materials(directory: Path | None = None) -> list[str]:
    names: set[str] = set()
    for folder in _materials_dirs(directory):
        if folder.is_dir():
            names.update(path.stem for path in folder.glob(f"*{MATERIAL_SUFFIX}"))
    return sorted(names)


def parse_material_file(path: Path) -> SellmeierMaterial:
    raw = dotenv_values(path)
    missing = [key for key in _REQUIRED_KEYS if not (raw.get(key) or "").strip()]
    if missing:
        raise ConfigError(f"Material file {path} is missing keys: {', '.join(missing)}")
    try:
        formula = FormulaVariant((raw["FORMULA"] or "").strip().lower())
    except ValueError:
        raise ConfigError(f"Material file {path}: unknown FORMULA {raw['FORMULA']!r}") from None
    try:
        coefficients = tuple(
            float(token) for token in (raw["COEFFICIENTS"] or "").split(",") if token.strip()
        )
        wavelength_min = float(raw["WAVELENGTH_MIN_UM"] or "") * 1e-6
        wavelength_max = float(raw["WAVELENGTH_MAX_UM"] or "") * 1e-6
        temperature = (raw.get("TEMPERATURE_C") or "").strip()
        temperature_c = float(temperature) if temperature else None
    except ValueError as exc:
        raise ConfigError(f"Material file {path}: {exc}") from None
    return SellmeierMaterial(
        name=(raw["NAME"] or "").strip(),
        formula=formula,
        coefficients=coefficients,
        wavelength_min=wavelength_min,
        wavelength_max=wavelength_max,
        axis=(raw.get("AXIS") or "").strip(),
        temperature_c=temperature_c,
        provenance=(raw.get("PROVENANCE") or "").strip(),
    )


@lru_cache(maxsize=None)
def load_material(name: str, directory: Path | None = None) -> SellmeierMaterial:
    for folder in _materials_dirs(directory):
        path = folder / f"{name}{MATERIAL_SUFFIX}"
        if path.is_file():
            logger.debug("Loading material %s from %s", name, path)
            return parse_material_file(path)
    available = ", ".join(list_materials(directory)) or "(none)"
    raise MaterialNotFoundError(f"Material {name!r} not found. Available: {available}")


@dataclass(frozen=True)
class DerivedScales:
    """Counter-propagation time scales of one tuning.

    omega_gvm is None at degeneracy (tau_gvm == 0): the GVM scale is unbounded
    and the linearised propagation phase vanishes identically.
    """

    kprime_s: float
    kprime_i: float
    tau_gvs: float
    tau_gvm: float
    omega_gvs: float
    omega_gvm: float | None

    @property
    def gvm_unbounded(self) -> bool:
        return self.omega_gvm is None


def derived_scales(tuning: TuningConfiguration) -> DerivedScales:
    kprime_s = float(inverse_group_velocity(tuning.material, angular_frequency(tuning.lambda_s)))
    kprime_i = float(inverse_group_velocity(tuning.material, angular_frequency(tuning.lambda_i)))
    half_length = 0.5 * tuning.crystal_length
    tau_gvs = half_length * (kprime_s + kprime_i)
    if abs(kprime_s - kprime_i) <= DEGENERACY_RTOL * (kprime_s + kprime_i):
        tau_gvm = 0.0
        omega_gvm = None
    else:
        tau_gvm = half_length * (kprime_s - kprime_i)
        omega_gvm = 1.0 / tau_gvm
    return DerivedScales(
        kprime_s=kprime_s,
        kprime_i=kprime_i,
        tau_gvs=tau_gvs,
        tau_gvm=tau_gvm,
        omega_gvs=1.0 / tau_gvs,
        omega_gvm=omega_gvm,
    )
