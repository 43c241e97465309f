"""
Experiment orchestration: train, then report against the oracle.
"""

import itertools
import logging
import math
import time
from typing import List, Optional

import numpy as np

from .diffcore import MlpParams, forward_jet
from .errors import AbortedRunError
from .losses import rayleigh_or_nan
from .models import PairSummary, ProblemMode, RunConfig, RunSummary, TrainRecord
from .oracle import (
    max_abs_error,
    normalize_to_unit_energy,
    reference_solutions,
    sign_invariant_l2_error,
)
from .output_generator import OutputGenerator
from .sampling import energy, eval_grid, mc_inner
from .trainer import Trainer


class ExperimentRunner:
    """Runs one configured experiment and writes its artifacts."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.spec = config.problem
        self.references = reference_solutions(self.spec)
        self.logger = logging.getLogger(__name__)

    def run(self) -> RunSummary:
        start = time.perf_counter()
        generator = OutputGenerator(self.config.output_dir, self.spec.num_outputs,
                                    self.references)
        generator.write_resolved_config(self.config)

        with generator:
            trainer = Trainer(self.config, sink=generator)
            try:
                result = trainer.train()
            except AbortedRunError as e:
                self.logger.error(f"Run aborted: {e}")
                if e.params is not None:
                    generator.save_params(e.params)
                    summary = self.summarize(e.params, e.record, time.perf_counter() - start)
                    summary.success = False
                    summary.message = str(e)
                    generator.write_summary(summary)
                raise

        generator.save_params(result.params)
        summary = self.summarize(result.params, result.record, time.perf_counter() - start)
        generator.write_summary(summary)
        return summary

    def summarize(self, params: MlpParams, record: Optional[TrainRecord],
                  wall_clock: float) -> RunSummary:
        """Eigenvalue estimates and errors on the evaluation grid, sorted by eigenvalue."""
        spec = self.spec
        a, b = spec.a, spec.b
        x = eval_grid(spec, self.config.training.eval_points)
        jets = forward_jet(params, x)
        m = spec.num_outputs
        last = record.last if record is not None else None

        estimates = [rayleigh_or_nan(jets.v[:, i], jets.d2[:, i], a, b) for i in range(m)]
        if spec.learns_eigenvalue:
            order = sorted(range(m), key=lambda i: (math.isnan(estimates[i]), estimates[i]))
        else:
            order = list(range(m))

        homogeneous = all(bc.value == 0.0 for bc in spec.boundary)
        pairs: List[PairSummary] = []
        for rank, i in enumerate(order):
            u = jets.v[:, i]
            pair = PairSummary(
                rank=rank + 1,
                output_index=i + 1,
                eigenvalue=spec.eigenvalue if spec.mode is ProblemMode.FIXED_LAMBDA
                else estimates[i],
                rayleigh_mean=last.rayleigh_mean[i] if last else float("nan"),
                rayleigh_std=last.rayleigh_std[i] if last else float("nan"),
                energy=energy(u, a, b),
            )
            if rank < len(self.references):
                ref = self.references[rank]
                u_ref = ref(x)
                pair.reference_eigenvalue = ref.eigenvalue
                if spec.learns_eigenvalue:
                    # amplitude and sign carry no information for an eigenfunction
                    u_hat = normalize_to_unit_energy(u, a, b)
                    ref_hat = normalize_to_unit_energy(u_ref, a, b)
                    pair.l2_error = sign_invariant_l2_error(u_hat, ref_hat, a, b)
                    pair.max_abs_error = max_abs_error(u_hat, ref_hat, sign_invariant=True)
                else:
                    pair.l2_error = sign_invariant_l2_error(u, u_ref, a, b)
                    pair.max_abs_error = max_abs_error(u, u_ref, sign_invariant=homogeneous)
            pairs.append(pair)

        max_ortho = None
        if m > 1:
            unit = [normalize_to_unit_energy(jets.v[:, i], a, b) for i in range(m)]
            max_ortho = max(abs(mc_inner(unit[i], unit[j], a, b))
                            for i, j in itertools.combinations(range(m), 2))

        return RunSummary(
            success=True,
            message="completed",
            pairs=pairs,
            epochs_run=len(record) if record is not None else 0,
            wall_clock=wall_clock,
            max_ortho=max_ortho,
        )


def run_experiment(config: RunConfig) -> RunSummary:
    """Train per the configuration and write metrics, dumps and summary to disk."""
    return ExperimentRunner(config).run()


def evaluate_params(config: RunConfig, params: MlpParams) -> np.ndarray:
    """Learned functions on the evaluation grid."""
    x = eval_grid(config.problem, config.training.eval_points)
    return forward_jet(params, x).v
