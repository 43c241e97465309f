"""
File utility functions for eigennet.
"""

import csv
import logging
import math
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import yaml

# 17 significant digits round-trip every float64 exactly
FLOAT_FORMAT = ".17g"


def ensure_directory(path: str) -> Path:
    """Create a directory (and parents) if needed and check it is writable."""
    directory = Path(path)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        logging.error(f"Cannot create output directory {directory}: {e}")
        raise
    if not os.access(directory, os.W_OK):
        raise PermissionError(f"Output directory is not writable: {directory}")
    return directory


def format_value(value: Any) -> str:
    """Render a CSV cell; floats keep full precision, None becomes empty."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float) or hasattr(value, "dtype"):
        value = float(value)
        if math.isnan(value):
            return "nan"
        return format(value, FLOAT_FORMAT)
    return str(value)


def write_csv_file(file_path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    """Write a CSV file with a header row."""
    try:
        with open(file_path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_value(v) for v in row])
    except Exception as e:
        logging.error(f"Error writing {file_path}: {e}")
        raise


def read_csv_file(file_path: str) -> List[Dict[str, str]]:
    """Read a CSV file into a list of row dictionaries."""
    with open(file_path, "r", newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def read_yaml_file(file_path: str) -> Dict[str, Any]:
    """Read YAML file safely."""
    try:
        with open(file_path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        logging.error(f"Invalid YAML in {file_path}: {e}")
        raise
    except Exception as e:
        logging.error(f"Error reading {file_path}: {e}")
        raise
    return data if data is not None else {}


def write_yaml_file(file_path: str, data: Dict[str, Any]) -> None:
    """Write YAML file safely."""
    try:
        with open(file_path, "w", encoding="utf-8") as f:
            yaml.safe_dump(data, f, default_flow_style=False, sort_keys=False)
    except Exception as e:
        logging.error(f"Error writing {file_path}: {e}")
        raise


def parse_scalar(text: str) -> Any:
    """Parse a command-line value the way YAML would (numbers, lists, null...)."""
    try:
        value = yaml.safe_load(text)
    except yaml.YAMLError:
        return text
    if isinstance(value, str) and any(ch.isdigit() for ch in value):
        # YAML 1.1 reads 1e-3 (no dot) as a string
        try:
            return float(value)
        except ValueError:
            pass
    return value


def resolve_output_dir(output_dir: Optional[str], root: Optional[str] = None) -> str:
    """Relative output directories are placed under ``root`` when one is given."""
    if output_dir is None:
        return root or "./runs"
    path = Path(output_dir)
    if root and not path.is_absolute():
        return str(Path(root) / path)
    return str(path)
