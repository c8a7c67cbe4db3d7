from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike

from mopo_squeeze.errors import ConfigError

METADATA_PREFIX = "# "


def format_value(value: float) -> str:
    # repr gives the shortest string that parses back to the same double.
    number = float(value)
    if math.isnan(number):
        return "nan"
    return repr(number)


@dataclass
class DataTable:
    metadata: dict[str, str]
    frame: pd.DataFrame


def write_table(
    path: Path,
    metadata: Mapping[str, str],
    columns: Mapping[str, ArrayLike],
) -> Path:
    """Write `# key=value` header lines, a column header, then tab-separated rows."""
    if not columns:
        raise ConfigError(f"No columns to write for {path}")
    arrays = {name: np.atleast_1d(np.asarray(values, dtype=float)) for name, values in columns.items()}
    lengths = {array.size for array in arrays.values()}
    if len(lengths) != 1:
        raise ConfigError(f"Columns for {path} differ in length: {sorted(lengths)}")

    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        for key, value in metadata.items():
            if "\n" in str(value) or "=" in str(key):
                raise ConfigError(f"Metadata entry {key!r} cannot be written on one line")
            handle.write(f"{METADATA_PREFIX}{key}={value}\n")
        writer = csv.writer(handle, delimiter="\t", lineterminator="\n")
        writer.writerow(list(arrays))
        for row in zip(*arrays.values()):
            writer.writerow([format_value(value) for value in row])
    return path


def read_table(path: Path) -> DataTable:
    metadata: dict[str, str] = {}
    header_lines = 0
    with path.open("r", encoding="utf-8") as handle:
        for line in handle:
            if not line.startswith("#"):
                break
            header_lines += 1
            key, sep, value = line[1:].strip().partition("=")
            if sep:
                metadata[key.strip()] = value.strip()
    frame = pd.read_csv(
        path,
        sep="\t",
        skiprows=header_lines,
        float_precision="round_trip",
    )
    return DataTable(metadata=metadata, frame=frame)
