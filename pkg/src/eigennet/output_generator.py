"""
Output generation module for eigennet: metrics, function dumps, summaries.
"""

import csv
import logging
from pathlib import Path
from typing import IO, Any, List, Optional, Sequence

import numpy as np

from .config import save_resolved
from .diffcore import MlpParams
from .models import EpochMetrics, FunctionSnapshot, RunConfig, RunSummary
from .oracle import AnalyticSolution
from .utils.file_utils import ensure_directory, format_value, write_csv_file

METRIC_COLUMNS = [
    "epoch", "lr", "total", "residual_l2", "residual_inf", "boundary",
    "energy_pen", "ortho", "reg", "batches", "failures",
]
SUMMARY_COLUMNS = [
    "rank", "output_index", "eigenvalue", "reference_eigenvalue", "rayleigh_mean",
    "rayleigh_std", "energy", "l2_error", "max_abs_error", "max_ortho",
    "epochs_run", "wall_clock",
]


def metrics_header(num_outputs: int) -> List[str]:
    """Column set of metrics.csv; depends only on the number of outputs."""
    header = list(METRIC_COLUMNS)
    for i in range(1, num_outputs + 1):
        header += [f"rayleigh_pen_{i}", f"rayleigh_mean_{i}", f"rayleigh_std_{i}"]
    return header


def metrics_row(metrics: EpochMetrics) -> List[Any]:
    row: List[Any] = [
        metrics.epoch, metrics.lr, metrics.total, metrics.residual_l2,
        metrics.residual_inf, metrics.boundary, metrics.energy_pen, metrics.ortho,
        metrics.reg, metrics.batches, metrics.failures,
    ]
    for pen, mean, std in zip(metrics.rayleigh_pen, metrics.rayleigh_mean, metrics.rayleigh_std):
        row += [pen, mean, std]
    return row


def function_table(x: np.ndarray, values: np.ndarray,
                   references: Sequence[AnalyticSolution] = ()) -> tuple:
    """Header and rows for a function dump: x, u_1..u_m, then ref_1..ref_k."""
    values = np.atleast_2d(np.asarray(values, dtype=np.float64).T).T
    header = ["x"] + [f"u_{i}" for i in range(1, values.shape[1] + 1)]
    columns = [x] + [values[:, i] for i in range(values.shape[1])]
    for k, ref in enumerate(references, start=1):
        header.append(f"ref_{k}")
        columns.append(ref(x))
    rows = np.column_stack(columns)
    return header, rows


class OutputGenerator:
    """Writes every artifact of a run into one output directory."""

    def __init__(self, output_dir: str, num_outputs: int,
                 references: Sequence[AnalyticSolution] = ()):
        self.output_dir = ensure_directory(output_dir)
        self.num_outputs = num_outputs
        self.references = list(references)
        self.logger = logging.getLogger(__name__)
        self._metrics_file: Optional[IO[str]] = None
        self._metrics_writer: Any = None

    @property
    def metrics_path(self) -> Path:
        return self.output_dir / "metrics.csv"

    def open(self) -> "OutputGenerator":
        self._metrics_file = open(self.metrics_path, "w", newline="", encoding="utf-8")
        self._metrics_writer = csv.writer(self._metrics_file)
        self._metrics_writer.writerow(metrics_header(self.num_outputs))
        return self

    def close(self) -> None:
        if self._metrics_file is not None:
            self._metrics_file.close()
            self._metrics_file = None
            self.logger.info(f"Metrics written to {self.metrics_path}")

    def __enter__(self) -> "OutputGenerator":
        return self.open()

    def __exit__(self, *exc: Any) -> None:
        self.close()

    def write_resolved_config(self, config: RunConfig) -> Path:
        path = self.output_dir / "config.resolved"
        save_resolved(config, str(path))
        return path

    def write_epoch(self, metrics: EpochMetrics) -> None:
        if self._metrics_writer is None:
            self.open()
        self._metrics_writer.writerow([format_value(v) for v in metrics_row(metrics)])

    def write_snapshot(self, snapshot: FunctionSnapshot) -> Path:
        path = self.output_dir / f"functions_epoch{snapshot.epoch}.csv"
        header, rows = function_table(snapshot.x, snapshot.values, self.references)
        write_csv_file(str(path), header, rows)
        self.logger.debug(f"Snapshot of epoch {snapshot.epoch} written to {path}")
        return path

    def write_summary(self, summary: RunSummary) -> Path:
        path = self.output_dir / "summary.csv"
        rows = []
        for pair in summary.pairs:
            rows.append([
                pair.rank, pair.output_index, pair.eigenvalue, pair.reference_eigenvalue,
                pair.rayleigh_mean, pair.rayleigh_std, pair.energy, pair.l2_error,
                pair.max_abs_error, summary.max_ortho, summary.epochs_run, summary.wall_clock,
            ])
        write_csv_file(str(path), SUMMARY_COLUMNS, rows)
        self.logger.info(f"Summary written to {path}")
        return path

    def save_params(self, params: MlpParams) -> Path:
        path = self.output_dir / "params.npz"
        np.savez(path, **params.to_arrays())
        return path


def write_oracle_dump(file_path: str, x: np.ndarray,
                      solutions: Sequence[AnalyticSolution]) -> None:
    """Analytic functions on a grid, with their eigenvalues in the header names."""
    header = ["x"] + [
        f"{s.name}" if s.eigenvalue is None else f"{s.name}[lambda={format_value(s.eigenvalue)}]"
        for s in solutions
    ]
    rows = np.column_stack([x] + [s(x) for s in solutions])
    write_csv_file(file_path, header, rows)


def load_params(file_path: str) -> MlpParams:
    with np.load(file_path) as data:
        return MlpParams.from_arrays({k: data[k] for k in data.files})
