import math
from pathlib import Path

import numpy as np
import pytest

from eigennet import experiment as experiment_module
from eigennet import trainer as trainer_module
from eigennet.config import parse_config
from eigennet.diffcore import forward_jet, init_gaussian
from eigennet.errors import AbortedRunError, NumericError
from eigennet.experiment import ExperimentRunner, evaluate_params, run_experiment
from eigennet.losses import rayleigh_or_nan
from eigennet.oracle import analytic_eigenpair
from eigennet.output_generator import (
    SUMMARY_COLUMNS,
    function_table,
    load_params,
    metrics_header,
    write_oracle_dump,
)
from eigennet.utils.file_utils import read_csv_file


def _header(path):
    return Path(path).read_text(encoding="utf-8").splitlines()[0].split(",")


class TestOutputs:
    def test_run_writes_all_artifacts(self, tiny_config):
        summary = run_experiment(tiny_config)
        out = Path(tiny_config.output_dir)
        for name in ("metrics.csv", "summary.csv", "params.npz", "config.resolved",
                     "functions_epoch0.csv", "functions_epoch1.csv", "functions_epoch3.csv"):
            assert (out / name).exists(), name
        assert summary.success
        assert summary.epochs_run == 3
        assert len(read_csv_file(str(out / "metrics.csv"))) == 3

    def test_headers_are_stable(self, tiny_config):
        run_experiment(tiny_config)
        out = Path(tiny_config.output_dir)
        assert _header(out / "metrics.csv") == metrics_header(2)
        assert _header(out / "summary.csv") == SUMMARY_COLUMNS
        assert _header(out / "functions_epoch3.csv") == ["x", "u_1", "u_2", "ref_1", "ref_2"]

    def test_zero_epochs(self, tiny_config):
        tiny_config.training.epochs = 0
        summary = run_experiment(tiny_config)
        out = Path(tiny_config.output_dir)
        assert read_csv_file(str(out / "metrics.csv")) == []
        assert _header(out / "metrics.csv") == metrics_header(2)
        assert (out / "functions_epoch0.csv").exists()
        assert not (out / "functions_epoch1.csv").exists()
        assert summary.epochs_run == 0
        assert all(math.isnan(p.rayleigh_mean) for p in summary.pairs)

    def test_rerun_is_bit_identical(self, tiny_config, tmp_path):
        run_experiment(tiny_config)
        first = (Path(tiny_config.output_dir) / "metrics.csv").read_bytes()
        tiny_config.output_dir = str(tmp_path / "again")
        run_experiment(tiny_config)
        second = (Path(tiny_config.output_dir) / "metrics.csv").read_bytes()
        assert first == second

    def test_resolved_config_reproduces_run(self, tiny_config):
        run_experiment(tiny_config)
        resolved = parse_config(str(Path(tiny_config.output_dir) / "config.resolved"))
        assert resolved == tiny_config

    def test_params_round_trip(self, tiny_config):
        run_experiment(tiny_config)
        params = load_params(str(Path(tiny_config.output_dir) / "params.npz"))
        assert params.widths == [1, 6, 6, 2]
        assert evaluate_params(tiny_config, params).shape == (50, 2)


class TestSummary:
    def test_pairs_sorted_by_eigenvalue(self, tiny_config):
        summary = run_experiment(tiny_config)
        assert [p.rank for p in summary.pairs] == [1, 2]
        assert sorted(p.output_index for p in summary.pairs) == [1, 2]
        assert summary.eigenvalues == sorted(summary.eigenvalues)
        assert [p.reference_eigenvalue for p in summary.pairs] == pytest.approx([1.0, 4.0])
        assert summary.max_ortho is not None

    def test_sorting_reorders_outputs(self, tiny_config):
        runner = ExperimentRunner(tiny_config)
        params = init_gaussian([1, 6, 6, 2], seed=11)
        summary = runner.summarize(params, None, 0.0)
        x = np.linspace(0, math.pi, 50)

        jets = forward_jet(params, x)
        estimates = [rayleigh_or_nan(jets.v[:, i], jets.d2[:, i], 0, math.pi) for i in range(2)]
        expected_order = list(np.argsort(estimates) + 1)
        assert [p.output_index for p in summary.pairs] == expected_order

    def test_exact_eigenfunction_has_no_error(self, tiny_config, monkeypatch):
        runner = ExperimentRunner(tiny_config)
        grid = np.linspace(0, math.pi, 50)
        ref = [analytic_eigenpair(1)(grid), analytic_eigenpair(2)(grid)]

        class ExactJets:
            v = np.column_stack([-3.0 * ref[1], 0.5 * ref[0]])
            d2 = np.column_stack([-4.0 * v[:, 0], -1.0 * v[:, 1]])

        monkeypatch.setattr(experiment_module, "forward_jet", lambda params, x: ExactJets)
        summary = runner.summarize(None, None, 0.0)
        assert [p.output_index for p in summary.pairs] == [2, 1]
        assert summary.eigenvalues == pytest.approx([1.0, 4.0])
        for pair in summary.pairs:
            assert pair.l2_error == pytest.approx(0.0, abs=1e-12)
            assert pair.max_abs_error == pytest.approx(0.0, abs=1e-12)

    def test_aborted_run_still_writes_summary(self, tiny_config, monkeypatch):
        def broken(*args, **kwargs):
            raise NumericError("non-finite loss")

        monkeypatch.setattr(trainer_module, "composite_loss", broken)
        tiny_config.training.max_failures = 0
        with pytest.raises(AbortedRunError):
            run_experiment(tiny_config)
        out = Path(tiny_config.output_dir)
        assert (out / "params.npz").exists()
        assert len(read_csv_file(str(out / "summary.csv"))) == 2


class TestTables:
    def test_function_table_single_output(self):
        x = np.linspace(0, 1, 5)
        header, rows = function_table(x, x ** 2)
        assert header == ["x", "u_1"]
        assert rows.shape == (5, 2)

    def test_oracle_dump(self, tmp_path):
        path = tmp_path / "oracle.csv"
        x = np.linspace(0, math.pi, 11)
        write_oracle_dump(str(path), x, [analytic_eigenpair(k) for k in (1, 2)])
        rows = read_csv_file(str(path))
        assert len(rows) == 11
        assert _header(path) == ["x", "eigen1[lambda=1]", "eigen2[lambda=4]"]
