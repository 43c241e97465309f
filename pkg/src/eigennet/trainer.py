"""
Training loop: sample a batch, evaluate the composite loss, backpropagate, step Adam.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Protocol, Tuple

import numpy as np
from tqdm import tqdm

from .diffcore import MlpParams, backward, forward_jet, init_gaussian
from .errors import AbortedRunError, NumericError
from .losses import composite_loss
from .models import (
    EpochMetrics,
    FunctionSnapshot,
    LossBreakdown,
    LossWeights,
    LrSchedule,
    NetConfig,
    ProblemSpec,
    RunConfig,
    TrainConfig,
    TrainRecord,
)
from .optimizer import AdamState, adam_step, clip_by_global_norm, lr_at
from .sampling import BatchSampler, eval_grid


class MetricsSink(Protocol):
    """Receives training output as it is produced."""

    def write_epoch(self, metrics: EpochMetrics) -> None: ...

    def write_snapshot(self, snapshot: FunctionSnapshot) -> None: ...


@dataclass
class TrainResult:
    """Final parameters, optimizer state and everything recorded on the way."""
    params: MlpParams
    state: AdamState
    record: TrainRecord
    snapshots: List[FunctionSnapshot] = field(default_factory=list)


def summarize_epoch(epoch: int, lr: float, breakdowns: List[LossBreakdown],
                    num_outputs: int, failures: int = 0) -> EpochMetrics:
    """Average the batch losses of one epoch; Rayleigh mean/std are over batches."""
    if not breakdowns:
        nan = float("nan")
        return EpochMetrics(
            epoch=epoch, lr=lr, total=nan, residual_l2=nan, residual_inf=nan,
            boundary=nan, energy_pen=nan, rayleigh_pen=[nan] * num_outputs,
            ortho=nan, reg=nan, rayleigh_mean=[nan] * num_outputs,
            rayleigh_std=[nan] * num_outputs, batches=0, failures=failures,
        )

    def mean(name: str) -> float:
        return float(np.mean([getattr(b, name) for b in breakdowns]))

    pens = np.array([b.rayleigh_pen for b in breakdowns], dtype=np.float64)
    quotients = np.array([b.rayleigh for b in breakdowns], dtype=np.float64)
    return EpochMetrics(
        epoch=epoch,
        lr=lr,
        total=mean("total"),
        residual_l2=mean("residual_l2"),
        residual_inf=mean("residual_inf"),
        boundary=mean("boundary"),
        energy_pen=mean("energy_pen"),
        rayleigh_pen=[float(p) for p in pens.mean(axis=0)],
        ortho=mean("ortho"),
        reg=mean("reg"),
        rayleigh_mean=[float(r) for r in quotients.mean(axis=0)],
        rayleigh_std=[float(s) for s in quotients.std(axis=0)],
        batches=len(breakdowns),
        failures=failures,
    )


class Trainer:
    """Owns the parameters and optimizer state of one run."""

    def __init__(self, config: RunConfig, sink: Optional[MetricsSink] = None):
        self.config = config
        self.sink = sink
        self.logger = logging.getLogger(__name__)

        train_cfg = config.training
        self.spec = config.problem
        self.grid = eval_grid(self.spec, train_cfg.eval_points)
        self.sampler = BatchSampler(
            self.spec,
            train_cfg.interior_batch,
            train_cfg.boundary_batch,
            rng=np.random.default_rng([train_cfg.seed, 1]),
        )

    def init_params(self) -> MlpParams:
        widths = self.config.network.widths(self.spec.num_outputs)
        return init_gaussian(widths, self.config.training.seed, self.config.network.init_std)

    def snapshot(self, params: MlpParams, epoch: int) -> FunctionSnapshot:
        values = forward_jet(params, self.grid).v
        snap = FunctionSnapshot(epoch=epoch, x=self.grid.copy(), values=values)
        if self.sink is not None:
            self.sink.write_snapshot(snap)
        return snap

    def step(self, params: MlpParams, state: AdamState,
             lr: float) -> Tuple[MlpParams, AdamState, LossBreakdown]:
        """One optimization step on a fresh batch."""
        train_cfg = self.config.training
        batch = self.sampler.next_batch()
        breakdown, graph = composite_loss(
            params, batch, self.spec, self.config.weights,
            detach_rayleigh=train_cfg.detach_rayleigh,
        )
        if not np.isfinite(breakdown.total):
            raise NumericError(f"non-finite loss {breakdown.total}")
        grads = clip_by_global_norm(backward(params, graph), train_cfg.grad_clip)
        params, state = adam_step(params, grads, state, lr)
        return params, state, breakdown

    def train(self, params: Optional[MlpParams] = None) -> TrainResult:
        train_cfg = self.config.training
        m = self.spec.num_outputs
        params = params if params is not None else self.init_params()
        state = AdamState.zeros_like(params)
        record = TrainRecord()
        snapshot_epochs = set(train_cfg.snapshot_schedule())
        snapshots = [self.snapshot(params, 0)]

        self.logger.info(
            "Training %s (%s, m=%d) for %d epochs x %d batches",
            self.spec.name, self.spec.mode.value, m,
            train_cfg.epochs, train_cfg.batches_per_epoch,
        )

        pbar = tqdm(range(1, train_cfg.epochs + 1), desc="Training",
                    disable=not train_cfg.progress)
        for epoch in pbar:
            lr = lr_at(self.config.schedule, epoch - 1)
            breakdowns: List[LossBreakdown] = []
            failures = 0
            for batch_index in range(train_cfg.batches_per_epoch):
                try:
                    params, state, breakdown = self.step(params, state, lr)
                except NumericError as e:
                    failures += 1
                    self.logger.warning(
                        "Epoch %d batch %d skipped: %s", epoch, batch_index, e
                    )
                    if failures > train_cfg.max_failures:
                        pbar.close()
                        partial = summarize_epoch(epoch, lr, breakdowns, m, failures)
                        record.append(partial)
                        if self.sink is not None:
                            self.sink.write_epoch(partial)
                        self.logger.error("Aborting run at epoch %d", epoch)
                        raise AbortedRunError(
                            f"{failures} numeric failures in epoch {epoch} "
                            f"(limit {train_cfg.max_failures})",
                            record=record,
                            params=params,
                        ) from e
                    continue
                breakdowns.append(breakdown)

            metrics = summarize_epoch(epoch, lr, breakdowns, m, failures)
            record.append(metrics)
            if self.sink is not None:
                self.sink.write_epoch(metrics)
            if epoch in snapshot_epochs:
                snapshots.append(self.snapshot(params, epoch))
            pbar.set_postfix(
                loss=f"{metrics.total:.4g}",
                lr=f"{lr:.2g}",
                R=",".join(f"{r:.3g}" for r in metrics.rayleigh_mean),
            )
        pbar.close()

        if record.last is not None:
            self.logger.info(
                "Finished: loss %.6g, Rayleigh means %s", record.last.total,
                [round(r, 6) for r in record.last.rayleigh_mean],
            )
        return TrainResult(params=params, state=state, record=record, snapshots=snapshots)


def train(spec: ProblemSpec, weights: LossWeights, network: NetConfig,
          training: TrainConfig, schedule: Optional[LrSchedule] = None,
          sink: Optional[MetricsSink] = None) -> Tuple[MlpParams, TrainRecord]:
    """Run a full training and return the final parameters with the per-epoch record."""
    config = RunConfig(
        problem=spec,
        weights=weights,
        network=network,
        training=training,
        schedule=schedule or LrSchedule(),
    )
    result = Trainer(config, sink).train()
    return result.params, result.record
