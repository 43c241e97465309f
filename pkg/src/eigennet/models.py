"""
Data models for eigennet.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np

from .errors import InvalidConfigError

# Point budget of one epoch: the size of the interior dataset used for training.
DATASET_INTERIOR_POINTS = 45_000
DEFAULT_HIDDEN_WIDTHS = [20, 20]
BOUNDARY_REDUCTIONS = {"sum", "mean"}
DEFAULT_SNAPSHOT_EPOCHS = [1, 50, 100, 200, 500, 1000, 3000, 5000]


def _finite(value: float, name: str) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise InvalidConfigError(f"must be a number, got {value!r}", field=name) from None
    if not math.isfinite(value):
        raise InvalidConfigError(f"must be finite, got {value}", field=name)
    return value


def _non_negative(value: float, name: str) -> float:
    value = _finite(value, name)
    if value < 0:
        raise InvalidConfigError(f"must be >= 0, got {value}", field=name)
    return value


def _integer(value: Any, name: str) -> int:
    try:
        valid = not isinstance(value, bool) and int(value) == value
    except (TypeError, ValueError, OverflowError):
        valid = False
    if not valid:
        raise InvalidConfigError(f"must be an integer, got {value!r}", field=name)
    return int(value)


def harmonic_gamma(num_outputs: int) -> List[float]:
    """Factor-weighted Rayleigh penalties 1/i for i = 1..m."""
    return [1.0 / i for i in range(1, num_outputs + 1)]


class ProblemMode(str, Enum):
    """What the network is asked to learn."""
    FIXED_LAMBDA = "fixed-lambda"
    SINGLE_PAIR = "single-pair"
    MULTI_PAIR = "multi-pair"


@dataclass
class BoundaryCondition:
    """Dirichlet value prescribed at one endpoint."""
    x: float
    value: float

    def to_dict(self) -> Dict[str, Any]:
        return {"x": self.x, "value": self.value}


@dataclass
class ProblemSpec:
    """Interval, boundary conditions and experiment mode."""
    a: float
    b: float
    boundary: List[BoundaryCondition]
    mode: ProblemMode = ProblemMode.MULTI_PAIR
    eigenvalue: Optional[float] = None
    num_outputs: int = 1
    name: str = "custom"

    def __post_init__(self):
        try:
            self.mode = ProblemMode(self.mode)
        except ValueError:
            choices = ", ".join(m.value for m in ProblemMode)
            raise InvalidConfigError(
                f"unknown mode {self.mode!r} (expected one of {choices})",
                field="problem.mode",
            ) from None
        self.boundary = [
            bc if isinstance(bc, BoundaryCondition) else BoundaryCondition(*bc)
            for bc in self.boundary
        ]
        self.validate()

    def validate(self) -> None:
        self.a = _finite(self.a, "problem.a")
        self.b = _finite(self.b, "problem.b")
        if not self.a < self.b:
            raise InvalidConfigError(
                f"interval must satisfy a < b, got [{self.a}, {self.b}]",
                field="problem.b",
            )
        if self.num_outputs < 1:
            raise InvalidConfigError(
                f"must be >= 1, got {self.num_outputs}", field="problem.num_outputs"
            )
        for bc in self.boundary:
            _finite(bc.value, "problem.boundary")
            if not (math.isclose(bc.x, self.a) or math.isclose(bc.x, self.b)):
                raise InvalidConfigError(
                    f"boundary location {bc.x} is not an endpoint of "
                    f"[{self.a}, {self.b}]",
                    field="problem.boundary",
                )

        if self.mode is ProblemMode.FIXED_LAMBDA:
            if self.eigenvalue is None:
                raise InvalidConfigError(
                    "fixed-lambda mode requires an eigenvalue", field="problem.eigenvalue"
                )
            self.eigenvalue = _finite(self.eigenvalue, "problem.eigenvalue")
            if self.num_outputs != 1:
                raise InvalidConfigError(
                    "fixed-lambda mode learns exactly one function",
                    field="problem.num_outputs",
                )
        else:
            if self.eigenvalue is not None:
                raise InvalidConfigError(
                    f"an eigenvalue cannot be given in {self.mode.value} mode",
                    field="problem.eigenvalue",
                )
            if self.mode is ProblemMode.SINGLE_PAIR and self.num_outputs != 1:
                raise InvalidConfigError(
                    "single-pair mode learns exactly one eigenpair",
                    field="problem.num_outputs",
                )

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def learns_eigenvalue(self) -> bool:
        return self.mode is not ProblemMode.FIXED_LAMBDA

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "a": self.a,
            "b": self.b,
            "boundary": [bc.to_dict() for bc in self.boundary],
            "mode": self.mode.value,
            "eigenvalue": self.eigenvalue,
            "num_outputs": self.num_outputs,
        }


@dataclass
class Batch:
    """Interior points plus boundary (x, target) pairs for one optimization step."""
    interior: np.ndarray
    boundary_x: np.ndarray
    boundary_target: np.ndarray

    @property
    def interior_size(self) -> int:
        return int(self.interior.shape[0])

    @property
    def boundary_size(self) -> int:
        return int(self.boundary_x.shape[0])


@dataclass
class LossWeights:
    """Coefficients of the composite loss."""
    alpha: float = 0.1
    mu: float = 0.1
    delta: float = 0.5
    beta: float = 1.5
    c: float = 1.0
    gamma: List[float] = field(default_factory=lambda: [1.0])
    nu: float = 2.0
    reg: float = 1e-8
    top_k: int = 40
    # "sum" weights the boundary term by the number of boundary samples
    boundary_reduction: str = "sum"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for name in ("alpha", "mu", "delta", "beta", "nu", "reg"):
            setattr(self, name, _non_negative(getattr(self, name), f"weights.{name}"))
        self.c = _finite(self.c, "weights.c")
        if self.c <= 0:
            raise InvalidConfigError(f"must be > 0, got {self.c}", field="weights.c")
        self.gamma = [_non_negative(g, "weights.gamma") for g in self.gamma]
        if int(self.top_k) != self.top_k or self.top_k < 1:
            raise InvalidConfigError(
                f"must be a positive integer, got {self.top_k}", field="weights.top_k"
            )
        self.top_k = int(self.top_k)
        if self.boundary_reduction not in BOUNDARY_REDUCTIONS:
            raise InvalidConfigError(
                f"must be one of {sorted(BOUNDARY_REDUCTIONS)}, got {self.boundary_reduction!r}",
                field="weights.boundary_reduction",
            )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alpha": self.alpha,
            "mu": self.mu,
            "delta": self.delta,
            "beta": self.beta,
            "c": self.c,
            "gamma": list(self.gamma),
            "nu": self.nu,
            "reg": self.reg,
            "top_k": self.top_k,
            "boundary_reduction": self.boundary_reduction,
        }


@dataclass
class LossBreakdown:
    """Weighted loss components of one batch.

    Every component is stored as the amount it contributes to ``total``.
    """
    residual_l2: float
    residual_inf: float
    boundary: float
    energy_pen: float
    rayleigh_pen: List[float]
    ortho: float
    reg: float
    total: float
    rayleigh: List[float]
    energy: List[float]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "residual_l2": self.residual_l2,
            "residual_inf": self.residual_inf,
            "boundary": self.boundary,
            "energy_pen": self.energy_pen,
            "rayleigh_pen": list(self.rayleigh_pen),
            "ortho": self.ortho,
            "reg": self.reg,
            "total": self.total,
            "rayleigh": list(self.rayleigh),
            "energy": list(self.energy),
        }


@dataclass
class NetConfig:
    """Network architecture and initialization."""
    hidden_widths: List[int] = field(default_factory=lambda: list(DEFAULT_HIDDEN_WIDTHS))
    init_std: float = 1.0

    def __post_init__(self):
        if not self.hidden_widths or any(int(w) < 1 for w in self.hidden_widths):
            raise InvalidConfigError(
                f"hidden widths must be positive, got {self.hidden_widths}",
                field="network.hidden_widths",
            )
        self.hidden_widths = [int(w) for w in self.hidden_widths]
        self.init_std = _finite(self.init_std, "network.init_std")
        if self.init_std <= 0:
            raise InvalidConfigError("must be > 0", field="network.init_std")

    def widths(self, num_outputs: int) -> List[int]:
        return [1, *self.hidden_widths, num_outputs]

    def to_dict(self) -> Dict[str, Any]:
        return {"hidden_widths": list(self.hidden_widths), "init_std": self.init_std}


@dataclass
class TrainConfig:
    """Epochs, batch sizes and run-level switches."""
    epochs: int = 1000
    interior_batch: int = 1024
    boundary_batch: int = 32
    batches_per_epoch: Optional[int] = None
    seed: int = 0
    snapshot_epochs: List[int] = field(default_factory=lambda: list(DEFAULT_SNAPSHOT_EPOCHS))
    detach_rayleigh: bool = False
    grad_clip: Optional[float] = None
    max_failures: int = 5
    eval_points: int = 1000
    progress: bool = True

    def __post_init__(self):
        minimums = {"interior_batch": 1, "boundary_batch": 1, "eval_points": 2,
                    "epochs": 0, "seed": 0, "max_failures": 0}
        for name, minimum in minimums.items():
            value = _integer(getattr(self, name), f"training.{name}")
            if value < minimum:
                raise InvalidConfigError(f"must be >= {minimum}, got {value}",
                                         field=f"training.{name}")
            setattr(self, name, value)
        if self.batches_per_epoch is None:
            self.batches_per_epoch = math.ceil(DATASET_INTERIOR_POINTS / self.interior_batch)
        self.batches_per_epoch = _integer(self.batches_per_epoch, "training.batches_per_epoch")
        if self.batches_per_epoch < 1:
            raise InvalidConfigError("must be >= 1", field="training.batches_per_epoch")
        if self.grad_clip is not None:
            self.grad_clip = _finite(self.grad_clip, "training.grad_clip")
            if not self.grad_clip > 0:
                raise InvalidConfigError("must be > 0 when set", field="training.grad_clip")
        self.snapshot_epochs = sorted({int(e) for e in self.snapshot_epochs})

    def snapshot_schedule(self) -> List[int]:
        """Epochs at which the learned functions are dumped; 0 is the initial state."""
        return sorted({0} | {e for e in self.snapshot_epochs if 0 <= e <= self.epochs})

    def to_dict(self) -> Dict[str, Any]:
        return {
            "epochs": self.epochs,
            "interior_batch": self.interior_batch,
            "boundary_batch": self.boundary_batch,
            "batches_per_epoch": self.batches_per_epoch,
            "seed": self.seed,
            "snapshot_epochs": list(self.snapshot_epochs),
            "detach_rayleigh": self.detach_rayleigh,
            "grad_clip": self.grad_clip,
            "max_failures": self.max_failures,
            "eval_points": self.eval_points,
            "progress": self.progress,
        }


@dataclass
class LrSchedule:
    """Step decay: lr0 * decay ** (epoch // period), floored at lr_min."""
    lr0: float = 4e-3
    decay: float = 0.7
    period: int = 100
    lr_min: float = 5e-5

    def __post_init__(self):
        self.lr0 = _finite(self.lr0, "schedule.lr0")
        self.decay = _finite(self.decay, "schedule.decay")
        self.lr_min = _finite(self.lr_min, "schedule.lr_min")
        if self.lr0 <= 0:
            raise InvalidConfigError("must be > 0", field="schedule.lr0")
        if not 0 < self.decay <= 1:
            raise InvalidConfigError("must be in (0, 1]", field="schedule.decay")
        if int(self.period) != self.period or self.period < 1:
            raise InvalidConfigError("must be a positive integer", field="schedule.period")
        self.period = int(self.period)
        if not 0 < self.lr_min <= self.lr0:
            raise InvalidConfigError("must be in (0, lr0]", field="schedule.lr_min")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lr0": self.lr0,
            "decay": self.decay,
            "period": self.period,
            "lr_min": self.lr_min,
        }


@dataclass
class EpochMetrics:
    """One row of the training record."""
    epoch: int
    lr: float
    total: float
    residual_l2: float
    residual_inf: float
    boundary: float
    energy_pen: float
    rayleigh_pen: List[float]
    ortho: float
    reg: float
    rayleigh_mean: List[float]
    rayleigh_std: List[float]
    batches: int
    failures: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "epoch": self.epoch,
            "lr": self.lr,
            "total": self.total,
            "residual_l2": self.residual_l2,
            "residual_inf": self.residual_inf,
            "boundary": self.boundary,
            "energy_pen": self.energy_pen,
            "rayleigh_pen": list(self.rayleigh_pen),
            "ortho": self.ortho,
            "reg": self.reg,
            "rayleigh_mean": list(self.rayleigh_mean),
            "rayleigh_std": list(self.rayleigh_std),
            "batches": self.batches,
            "failures": self.failures,
        }


@dataclass
class TrainRecord:
    """Per-epoch history of a training run."""
    epochs: List[EpochMetrics] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.epochs)

    def append(self, metrics: EpochMetrics) -> None:
        self.epochs.append(metrics)

    @property
    def last(self) -> Optional[EpochMetrics]:
        return self.epochs[-1] if self.epochs else None

    def to_dict(self) -> Dict[str, Any]:
        return {"epochs": [e.to_dict() for e in self.epochs]}


@dataclass
class FunctionSnapshot:
    """Learned functions on the evaluation grid at one epoch."""
    epoch: int
    x: np.ndarray
    values: np.ndarray  # shape (len(x), m)


@dataclass
class RunConfig:
    """Everything needed to reproduce one experiment."""
    problem: ProblemSpec
    weights: LossWeights
    network: NetConfig = field(default_factory=NetConfig)
    training: TrainConfig = field(default_factory=TrainConfig)
    schedule: LrSchedule = field(default_factory=LrSchedule)
    output_dir: str = "./runs"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        m = self.problem.num_outputs
        if len(self.weights.gamma) != m:
            raise InvalidConfigError(
                f"expected {m} entries (one per output), got {len(self.weights.gamma)}",
                field="weights.gamma",
            )
        if self.weights.top_k > self.training.interior_batch:
            raise InvalidConfigError(
                f"top_k={self.weights.top_k} exceeds interior_batch="
                f"{self.training.interior_batch}",
                field="weights.top_k",
            )
        if not self.problem.boundary:
            raise InvalidConfigError(
                "at least one boundary condition is required", field="problem.boundary"
            )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "problem": self.problem.to_dict(),
            "weights": self.weights.to_dict(),
            "network": self.network.to_dict(),
            "training": self.training.to_dict(),
            "schedule": self.schedule.to_dict(),
            "output_dir": self.output_dir,
        }


@dataclass
class PairSummary:
    """Final report for one learned function, after sorting by eigenvalue."""
    rank: int
    output_index: int
    eigenvalue: float
    rayleigh_mean: float
    rayleigh_std: float
    energy: float
    reference_eigenvalue: Optional[float] = None
    l2_error: Optional[float] = None
    max_abs_error: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rank": self.rank,
            "output_index": self.output_index,
            "eigenvalue": self.eigenvalue,
            "rayleigh_mean": self.rayleigh_mean,
            "rayleigh_std": self.rayleigh_std,
            "energy": self.energy,
            "reference_eigenvalue": self.reference_eigenvalue,
            "l2_error": self.l2_error,
            "max_abs_error": self.max_abs_error,
        }


@dataclass
class RunSummary:
    """Result of a full experiment."""
    success: bool
    message: str
    pairs: List[PairSummary]
    epochs_run: int
    wall_clock: float
    max_ortho: Optional[float] = None

    @property
    def eigenvalues(self) -> List[float]:
        return [p.eigenvalue for p in self.pairs]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "success": self.success,
            "message": self.message,
            "pairs": [p.to_dict() for p in self.pairs],
            "epochs_run": self.epochs_run,
            "wall_clock": self.wall_clock,
            "max_ortho": self.max_ortho,
        }
