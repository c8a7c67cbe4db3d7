from __future__ import annotations

import math

import numpy as np
import pytest

from mopo_squeeze.errors import ConfigError
from mopo_squeeze.tables import format_value, read_table, write_table


def test_table_round_trip_is_exact(tmp_path, rng):
    values = rng.normal(size=25)
    path = write_table(
        tmp_path / "nested" / "sweep.tsv",
        {"material": "linbo3_congruent_e", "g": repr(1.2)},
        {"omega_over_gvs": np.linspace(-1, 1, 25), "sigma_linearized": values},
    )
    table = read_table(path)
    assert table.metadata == {"material": "linbo3_congruent_e", "g": "1.2"}
    assert list(table.frame.columns) == ["omega_over_gvs", "sigma_linearized"]
    assert np.array_equal(table.frame["sigma_linearized"].to_numpy(), values)


def test_header_layout(tmp_path):
    path = write_table(tmp_path / "t.tsv", {"figure": "fig2"}, {"a": [0.1], "b": [2.0]})
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines == ["# figure=fig2", "a\tb", "0.1\t2.0"]


def test_unbounded_values_survive(tmp_path):
    path = write_table(tmp_path / "t.tsv", {}, {"omega_gvm": [1.0, math.inf]})
    assert read_table(path).frame["omega_gvm"].iloc[1] == math.inf


def test_mismatched_columns_rejected(tmp_path):
    with pytest.raises(ConfigError, match="differ in length"):
        write_table(tmp_path / "t.tsv", {}, {"a": [1.0, 2.0], "b": [1.0]})


def test_multiline_metadata_rejected(tmp_path):
    with pytest.raises(ConfigError):
        write_table(tmp_path / "t.tsv", {"note": "two\nlines"}, {"a": [1.0]})


def test_format_value():
    assert format_value(0.1) == "0.1"
    assert format_value(float("nan")) == "nan"
    assert format_value(np.float64(1e-300)) == "1e-300"
