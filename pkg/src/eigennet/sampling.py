"""
Monte Carlo sampling and quadrature on an interval.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from .errors import InvalidArgumentError, InvalidConfigError
from .models import Batch, ProblemSpec

logger = logging.getLogger(__name__)

EVAL_GRID_POINTS = 1000


def sample_interior(spec: ProblemSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. uniform points in the open interval (a, b)."""
    if n < 1:
        raise InvalidArgumentError(f"need at least one interior point, got n={n}")
    x = rng.uniform(spec.a, spec.b, size=n)
    # uniform() is half-open; redraw the left endpoint if it ever comes up
    hit = x <= spec.a
    while np.any(hit):
        x[hit] = rng.uniform(spec.a, spec.b, size=int(hit.sum()))
        hit = x <= spec.a
    return x


def sample_boundary(spec: ProblemSpec, n: int,
                    rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """n (x, target) pairs drawn uniformly, with repetition, from the boundary conditions."""
    if not spec.boundary:
        raise InvalidConfigError("no boundary conditions to sample", field="problem.boundary")
    if n < 1:
        raise InvalidArgumentError(f"need at least one boundary point, got n={n}")
    locations = np.array([bc.x for bc in spec.boundary], dtype=np.float64)
    targets = np.array([bc.value for bc in spec.boundary], dtype=np.float64)
    idx = rng.integers(0, len(spec.boundary), size=n)
    return locations[idx], targets[idx]


def mc_inner(f_vals: np.ndarray, g_vals: np.ndarray, a: float, b: float) -> float:
    """<f, g> ~ (b - a) / N * sum f(x_i) g(x_i)."""
    f_vals = np.asarray(f_vals, dtype=np.float64)
    g_vals = np.asarray(g_vals, dtype=np.float64)
    if f_vals.shape != g_vals.shape:
        raise InvalidArgumentError(
            f"length mismatch: {f_vals.shape} vs {g_vals.shape}"
        )
    if f_vals.size == 0:
        raise InvalidArgumentError("cannot integrate over zero samples")
    return float((b - a) / f_vals.size * np.dot(f_vals.ravel(), g_vals.ravel()))


def mc_gram(values: np.ndarray, a: float, b: float) -> np.ndarray:
    """Matrix of pairwise inner products of the columns of an (N, m) array."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] == 0:
        raise InvalidArgumentError(f"expected a non-empty (N, m) array, got {values.shape}")
    return (b - a) / values.shape[0] * (values.T @ values)


def energy(u_vals: np.ndarray, a: float, b: float) -> float:
    """Quadrature of the squared L2 norm, the 'energy' of u."""
    u_vals = np.asarray(u_vals, dtype=np.float64)
    if u_vals.size == 0:
        raise InvalidArgumentError("cannot compute the energy of an empty sample")
    return mc_inner(u_vals, u_vals, a, b)


def eval_grid(spec: ProblemSpec, n: int = EVAL_GRID_POINTS) -> np.ndarray:
    """Uniform grid including both endpoints, used for snapshots and reports."""
    if n < 2:
        raise InvalidArgumentError(f"evaluation grid needs at least 2 points, got {n}")
    return np.linspace(spec.a, spec.b, n)


class BatchSampler:
    """Draws a fresh interior + boundary batch on every call."""

    def __init__(self, spec: ProblemSpec, interior_size: int, boundary_size: int,
                 seed: Optional[int] = None, rng: Optional[np.random.Generator] = None):
        self.spec = spec
        self.interior_size = interior_size
        self.boundary_size = boundary_size
        self.rng = rng if rng is not None else np.random.default_rng(seed)
        self.logger = logging.getLogger(__name__)

    def next_batch(self) -> Batch:
        interior = sample_interior(self.spec, self.interior_size, self.rng)
        boundary_x, boundary_target = sample_boundary(self.spec, self.boundary_size, self.rng)
        return Batch(interior, boundary_x, boundary_target)
