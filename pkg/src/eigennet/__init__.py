"""
EigenNet - eigenpairs of the 1-D Laplacian learned by a small neural network

A Python library for training a tanh MLP against a composite eigenvalue loss
(PDE residual, boundary, energy, Rayleigh-quotient and orthogonality terms),
with exact second-order input derivatives and analytic ground truth.
"""

__version__ = "0.1.0"
__author__ = "EigenNet Team"

# Core numerics
from .diffcore import Jet2, MlpParams, ParamGrad, backward, forward_jet, init_gaussian
from .sampling import BatchSampler, energy, mc_inner, sample_boundary, sample_interior
from .losses import composite_loss, ortho_penalty, rayleigh, rayleigh_residual
from .optimizer import AdamState, adam_step, lr_at

# Training and experiments
from .trainer import Trainer, train
from .experiment import ExperimentRunner, run_experiment
from .verifier import run_verification
from .config import parse_config
from .oracle import (
    analytic_eigenpair,
    analytic_fixed_lambda,
    fd_eigenvalues,
    sign_invariant_l2_error,
)
from .errors import (
    AbortedRunError,
    DegenerateFunctionError,
    EigenNetError,
    InvalidArgumentError,
    InvalidConfigError,
    NumericError,
)
from .models import (
    BoundaryCondition,
    LossBreakdown,
    LossWeights,
    LrSchedule,
    NetConfig,
    ProblemMode,
    ProblemSpec,
    RunConfig,
    RunSummary,
    TrainConfig,
    TrainRecord,
)

__all__ = [
    # Core numerics
    'Jet2',
    'MlpParams',
    'ParamGrad',
    'init_gaussian',
    'forward_jet',
    'backward',
    'BatchSampler',
    'sample_interior',
    'sample_boundary',
    'mc_inner',
    'energy',
    'rayleigh',
    'rayleigh_residual',
    'ortho_penalty',
    'composite_loss',
    'AdamState',
    'adam_step',
    'lr_at',

    # Training and experiments
    'Trainer',
    'train',
    'ExperimentRunner',
    'run_experiment',
    'run_verification',
    'parse_config',

    # Oracle
    'analytic_eigenpair',
    'analytic_fixed_lambda',
    'fd_eigenvalues',
    'sign_invariant_l2_error',

    # Models
    'ProblemMode',
    'BoundaryCondition',
    'ProblemSpec',
    'LossWeights',
    'LossBreakdown',
    'NetConfig',
    'TrainConfig',
    'LrSchedule',
    'TrainRecord',
    'RunConfig',
    'RunSummary',

    # Errors
    'EigenNetError',
    'InvalidConfigError',
    'InvalidArgumentError',
    'NumericError',
    'DegenerateFunctionError',
    'AbortedRunError',
]
