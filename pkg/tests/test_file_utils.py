import math

import numpy as np
import pytest

from eigennet.utils.file_utils import (
    ensure_directory,
    format_value,
    parse_scalar,
    read_csv_file,
    read_yaml_file,
    resolve_output_dir,
    write_csv_file,
    write_yaml_file,
)


@pytest.mark.parametrize("value,expected", [
    (None, ""),
    (True, "true"),
    (3, "3"),
    (0.1, "0.10000000000000001"),
    (np.float64(2.5), "2.5"),
    (math.nan, "nan"),
    ("fig1", "fig1"),
])
def test_format_value(value, expected):
    assert format_value(value) == expected


def test_full_precision_round_trip():
    value = math.pi / 7
    assert float(format_value(value)) == value


@pytest.mark.parametrize("text,expected", [
    ("3", 3),
    ("-1", -1),
    ("1.0e-3", 1e-3),
    ("1e-3", 1e-3),
    ("fig1", "fig1"),
    ("[4, 4]", [4, 4]),
    ("false", False),
    ("null", None),
    ("multi-pair", "multi-pair"),
])
def test_parse_scalar(text, expected):
    assert parse_scalar(text) == expected


def test_resolve_output_dir(tmp_path):
    assert resolve_output_dir(None) == "./runs"
    assert resolve_output_dir(None, str(tmp_path)) == str(tmp_path)
    assert resolve_output_dir("rel", str(tmp_path)) == str(tmp_path / "rel")
    assert resolve_output_dir(str(tmp_path / "abs"), "/elsewhere") == str(tmp_path / "abs")


def test_ensure_directory_creates_parents(tmp_path):
    path = ensure_directory(str(tmp_path / "a" / "b"))
    assert path.is_dir()


def test_csv_and_yaml_round_trip(tmp_path):
    csv_path = tmp_path / "t.csv"
    write_csv_file(str(csv_path), ["x", "y"], [[0.5, None], [1, 2.0]])
    assert read_csv_file(str(csv_path)) == [{"x": "0.5", "y": ""}, {"x": "1", "y": "2"}]

    yaml_path = tmp_path / "t.yaml"
    write_yaml_file(str(yaml_path), {"weights": {"nu": 2.0, "gamma": [1.0, 0.5]}})
    assert read_yaml_file(str(yaml_path)) == {"weights": {"nu": 2.0, "gamma": [1.0, 0.5]}}


def test_empty_yaml_is_empty_mapping(tmp_path):
    path = tmp_path / "empty.yaml"
    path.write_text("", encoding="utf-8")
    assert read_yaml_file(str(path)) == {}
