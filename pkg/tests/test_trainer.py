import math

import numpy as np
import pytest

from eigennet import trainer as trainer_module
from eigennet.config import parse_config
from eigennet.errors import AbortedRunError, NumericError
from eigennet.experiment import ExperimentRunner
from eigennet.models import LossBreakdown
from eigennet.trainer import Trainer, summarize_epoch, train


class RecordingSink:
    def __init__(self):
        self.epochs = []
        self.snapshots = []

    def write_epoch(self, metrics):
        self.epochs.append(metrics)

    def write_snapshot(self, snapshot):
        self.snapshots.append(snapshot)


def _breakdown(total, rayleigh):
    return LossBreakdown(
        residual_l2=total, residual_inf=0.0, boundary=0.0, energy_pen=0.0,
        rayleigh_pen=[r / 2 for r in rayleigh], ortho=0.0, reg=0.0, total=total,
        rayleigh=list(rayleigh), energy=[1.0] * len(rayleigh),
    )


class TestSummarizeEpoch:
    def test_means_and_spread(self):
        metrics = summarize_epoch(4, 1e-3, [_breakdown(1.0, [1.0, 4.0]),
                                            _breakdown(3.0, [3.0, 4.0])], 2)
        assert metrics.epoch == 4
        assert metrics.total == pytest.approx(2.0)
        assert metrics.rayleigh_mean == pytest.approx([2.0, 4.0])
        assert metrics.rayleigh_std == pytest.approx([1.0, 0.0])
        assert metrics.rayleigh_pen == pytest.approx([1.0, 2.0])
        assert metrics.batches == 2

    def test_no_batches(self):
        metrics = summarize_epoch(1, 1e-3, [], 3, failures=6)
        assert math.isnan(metrics.total)
        assert len(metrics.rayleigh_mean) == 3
        assert metrics.failures == 6


class TestTrainer:
    def test_record_has_one_row_per_epoch(self, tiny_config):
        sink = RecordingSink()
        result = Trainer(tiny_config, sink).train()
        assert [m.epoch for m in result.record.epochs] == [1, 2, 3]
        assert len(sink.epochs) == 3
        assert all(m.batches == 2 for m in result.record.epochs)
        assert all(math.isfinite(m.total) for m in result.record.epochs)
        assert [s.epoch for s in result.snapshots] == [0, 1, 3]
        assert result.snapshots[0].values.shape == (50, 2)
        assert result.state.t == 6

    def test_learning_rate_follows_schedule(self, tiny_config):
        record = Trainer(tiny_config).train().record
        assert [m.lr for m in record.epochs] == [4e-3] * 3

    def test_zero_epochs(self, tiny_config):
        tiny_config.training.epochs = 0
        sink = RecordingSink()
        trainer = Trainer(tiny_config, sink)
        initial = trainer.init_params()
        result = trainer.train()
        assert len(result.record) == 0
        assert [s.epoch for s in sink.snapshots] == [0]
        for w, w0 in zip(result.params.weights, initial.weights):
            np.testing.assert_array_equal(w, w0)

    def test_same_seed_same_record(self, tiny_config):
        first = Trainer(tiny_config).train()
        second = Trainer(tiny_config).train()
        assert first.record.to_dict() == second.record.to_dict()
        for w1, w2 in zip(first.params.weights, second.params.weights):
            np.testing.assert_array_equal(w1, w2)

    def test_different_seed_different_record(self, tiny_config):
        first = Trainer(tiny_config).train().record
        tiny_config.training.seed = 6
        second = Trainer(tiny_config).train().record
        assert first.to_dict() != second.to_dict()

    def test_numeric_failures_are_skipped(self, tiny_config, monkeypatch):
        real = trainer_module.composite_loss
        calls = {"n": 0}

        def flaky(*args, **kwargs):
            calls["n"] += 1
            if calls["n"] == 2:
                raise NumericError("overflow in layer 0", layer=0)
            return real(*args, **kwargs)

        monkeypatch.setattr(trainer_module, "composite_loss", flaky)
        record = Trainer(tiny_config).train().record
        assert record.epochs[0].failures == 1
        assert record.epochs[0].batches == 1
        assert record.epochs[1].failures == 0

    def test_abort_after_too_many_failures(self, tiny_config, monkeypatch):
        def broken(*args, **kwargs):
            raise NumericError("non-finite weights")

        monkeypatch.setattr(trainer_module, "composite_loss", broken)
        tiny_config.training.max_failures = 1
        with pytest.raises(AbortedRunError) as exc:
            Trainer(tiny_config).train()
        assert len(exc.value.record) == 1
        assert exc.value.record.last.failures == 2
        assert exc.value.params is not None

    def test_aborted_epoch_reaches_the_sink(self, tiny_config, monkeypatch):
        real = trainer_module.composite_loss
        calls = {"n": 0}

        def fails_from_third_batch(*args, **kwargs):
            calls["n"] += 1
            if calls["n"] >= 3:
                raise NumericError("overflow in layer 1", layer=1)
            return real(*args, **kwargs)

        monkeypatch.setattr(trainer_module, "composite_loss", fails_from_third_batch)
        tiny_config.training.max_failures = 0
        sink = RecordingSink()
        with pytest.raises(AbortedRunError) as exc:
            Trainer(tiny_config, sink).train()
        assert [m.epoch for m in sink.epochs] == [1, 2]
        assert len(sink.epochs) == len(exc.value.record)
        assert sink.epochs[-1].failures == 1
        assert sink.epochs[-1].batches == 0

    def test_functional_entry_point(self, tiny_config):
        params, record = train(tiny_config.problem, tiny_config.weights, tiny_config.network,
                               tiny_config.training)
        assert len(record) == 3
        assert params.widths == [1, 6, 6, 2]



DESK_SCALE = ["training.batches_per_epoch=4", "training.progress=false"]
SEEDS = (0, 1, 2)


def _passes_on_two_seeds(tmp_path, check, **flags):
    """Run up to three seeds; stochastic training counts as passing on two."""
    passed, reports = 0, []
    for index, seed in enumerate(SEEDS):
        config = parse_config(overrides=DESK_SCALE, output_dir=str(tmp_path / f"seed{seed}"),
                              seed=seed, **flags)
        summary = ExperimentRunner(config).run()
        ok, report = check(summary)
        reports.append(f"seed {seed}: {report}")
        passed += ok
        if passed == 2 or passed + (len(SEEDS) - index - 1) < 2:
            break
    return passed >= 2, "; ".join(reports)


def _eigenvalues_within(expected, rel):
    def check(summary):
        values = summary.eigenvalues
        ok = (values == sorted(values)
              and all(abs(v - e) <= rel * e for v, e in zip(values, expected)))
        return ok, f"eigenvalues {values}"
    return check


@pytest.mark.slow
class TestAcceptance:
    """Desk-scale runs (4 x 1024 interior points per epoch); select with ``pytest -m slow``."""

    @pytest.mark.parametrize("preset", ["fig1", "fig2", "fig3"])
    def test_fixed_lambda_matches_analytic_solution(self, preset, tmp_path):
        def check(summary):
            error = summary.pairs[0].max_abs_error
            return error < 0.02, f"max-abs error {error:.3g}"

        ok, report = _passes_on_two_seeds(tmp_path, check, preset=preset, epochs=1000)
        assert ok, report

    def test_single_pair_finds_ground_state(self, tmp_path):
        def check(summary):
            pair = summary.pairs[0]
            ok = (0.95 <= pair.rayleigh_mean <= 1.05 and pair.rayleigh_std < 0.05
                  and pair.l2_error < 0.05)
            return ok, (f"R mean {pair.rayleigh_mean:.4g}, std {pair.rayleigh_std:.3g}, "
                        f"L2 {pair.l2_error:.3g}")

        ok, report = _passes_on_two_seeds(tmp_path, check, mode="single-pair", epochs=2000)
        assert ok, report

    def test_three_pairs_are_sorted_orthogonal_and_accurate(self, tmp_path):
        eigen = _eigenvalues_within([1.0, 4.0, 9.0], 0.05)

        def check(summary):
            ok, report = eigen(summary)
            errors = [p.l2_error for p in summary.pairs]
            ok = ok and summary.max_ortho < 0.05 and all(e < 0.1 for e in errors)
            return ok, f"{report}, max ortho {summary.max_ortho:.3g}, L2 {errors}"

        ok, report = _passes_on_two_seeds(tmp_path, check, mode="multi-pair",
                                          num_outputs=3, epochs=5000)
        assert ok, report

    def test_four_pairs_with_harmonic_weights(self, tmp_path):
        ok, report = _passes_on_two_seeds(
            tmp_path, _eigenvalues_within([1.0, 4.0, 9.0, 16.0], 0.08),
            mode="multi-pair", num_outputs=4, epochs=5000,
        )
        assert ok, report

    @pytest.mark.xfail(strict=False, reason="five pairs may need more than desk scale")
    def test_five_pairs_with_harmonic_weights(self, tmp_path):
        ok, report = _passes_on_two_seeds(
            tmp_path, _eigenvalues_within([1.0, 4.0, 9.0, 16.0, 25.0], 0.08),
            mode="multi-pair", num_outputs=5, epochs=5000,
        )
        assert ok, report
