import math

import numpy as np
import pytest

from eigennet.diffcore import init_gaussian
from eigennet.models import (
    BoundaryCondition,
    LossWeights,
    LrSchedule,
    NetConfig,
    ProblemMode,
    ProblemSpec,
    RunConfig,
    TrainConfig,
)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


@pytest.fixture()
def small_params():
    return init_gaussian([1, 8, 8, 1], seed=0)


@pytest.fixture()
def two_output_params():
    return init_gaussian([1, 8, 8, 2], seed=3)


@pytest.fixture()
def dirichlet_bcs():
    return [BoundaryCondition(0.0, 0.0), BoundaryCondition(math.pi, 0.0)]


@pytest.fixture()
def single_pair_spec(dirichlet_bcs):
    return ProblemSpec(0.0, math.pi, dirichlet_bcs, mode=ProblemMode.SINGLE_PAIR,
                       name="dirichlet")


@pytest.fixture()
def multi_pair_spec(dirichlet_bcs):
    return ProblemSpec(0.0, math.pi, dirichlet_bcs, mode=ProblemMode.MULTI_PAIR,
                       num_outputs=2, name="dirichlet")


@pytest.fixture()
def fig1_spec():
    half_pi = math.pi / 2
    return ProblemSpec(0.0, half_pi, [(0.0, 0.0), (half_pi, 0.0)],
                       mode=ProblemMode.FIXED_LAMBDA, eigenvalue=4.0, name="fig1")


@pytest.fixture()
def tiny_training():
    """A run that finishes in well under a second."""
    return TrainConfig(epochs=3, interior_batch=64, boundary_batch=8, batches_per_epoch=2,
                       seed=5, snapshot_epochs=[1, 3], eval_points=50, progress=False)


@pytest.fixture()
def tiny_config(multi_pair_spec, tiny_training, tmp_path):
    return RunConfig(
        problem=multi_pair_spec,
        weights=LossWeights(gamma=[1.0, 0.5], top_k=8),
        network=NetConfig(hidden_widths=[6, 6]),
        training=tiny_training,
        schedule=LrSchedule(),
        output_dir=str(tmp_path / "run"),
    )
