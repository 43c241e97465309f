"""
Analytic ground truth, the finite-difference spectrum and error metrics.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, linalg

from .errors import InvalidArgumentError, InvalidConfigError
from .models import BoundaryCondition, ProblemMode, ProblemSpec
from .sampling import energy, mc_inner

logger = logging.getLogger(__name__)

FIXED_LAMBDA_CASES = ("fig1", "fig2", "fig3")
PRESETS = FIXED_LAMBDA_CASES + ("dirichlet",)

Function = Callable[[np.ndarray], np.ndarray]


@dataclass
class AnalyticSolution:
    """Closed-form solution of u'' + lam * u = 0 with Dirichlet data."""
    name: str
    a: float
    b: float
    u: Function
    du: Function
    d2u: Function
    lam: float
    boundary: List[BoundaryCondition] = field(default_factory=list)
    eigenvalue: Optional[float] = None
    stated_energy: Optional[float] = None

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.u(np.asarray(x, dtype=np.float64))

    def residual(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return self.d2u(x) + self.lam * self.u(x)

    def boundary_error(self) -> float:
        if not self.boundary:
            return 0.0
        return max(abs(float(self.u(np.float64(bc.x))) - bc.value) for bc in self.boundary)

    def energy(self) -> float:
        """Exact integral of u^2 over [a, b] (adaptive quadrature)."""
        value, _ = integrate.quad(lambda x: float(self.u(np.float64(x))) ** 2,
                                  self.a, self.b, epsabs=1e-13, epsrel=1e-12)
        return value


def analytic_eigenpair(k: int, a: float = 0.0, b: float = math.pi) -> AnalyticSolution:
    """k-th Dirichlet eigenpair of the Laplacian on [a, b], scaled to unit energy.

    On [0, pi] this is sqrt(2/pi) sin(kx) with eigenvalue k^2.
    """
    if k < 1:
        raise InvalidArgumentError(f"eigenpair index must be >= 1, got {k}")
    if not a < b:
        raise InvalidArgumentError(f"interval must satisfy a < b, got [{a}, {b}]")
    length = b - a
    omega = k * math.pi / length
    amp = math.sqrt(2.0 / length)
    return AnalyticSolution(
        name=f"eigen{k}",
        a=a,
        b=b,
        u=lambda x: amp * np.sin(omega * (x - a)),
        du=lambda x: amp * omega * np.cos(omega * (x - a)),
        d2u=lambda x: -amp * omega**2 * np.sin(omega * (x - a)),
        lam=omega**2,
        boundary=[BoundaryCondition(a, 0.0), BoundaryCondition(b, 0.0)],
        eigenvalue=omega**2,
        stated_energy=1.0,
    )


def analytic_fixed_lambda(case: str) -> AnalyticSolution:
    """The three known-eigenvalue problems on [0, pi/2]."""
    half_pi = math.pi / 2
    if case == "fig1":
        # u'' + 4u = 0, u(0) = 0, u(pi/2) = 0
        return AnalyticSolution(
            name=case, a=0.0, b=half_pi,
            u=lambda x: np.sin(2 * x),
            du=lambda x: 2 * np.cos(2 * x),
            d2u=lambda x: -4 * np.sin(2 * x),
            lam=4.0,
            boundary=[BoundaryCondition(0.0, 0.0), BoundaryCondition(half_pi, 0.0)],
            eigenvalue=4.0,
            stated_energy=1.0,
        )
    if case == "fig2":
        # u'' = 0, u(0) = 0, u(pi/2) = 1
        return AnalyticSolution(
            name=case, a=0.0, b=half_pi,
            u=lambda x: 2 * x / math.pi,
            du=lambda x: np.full_like(x, 2 / math.pi, dtype=np.float64),
            d2u=lambda x: np.zeros_like(x, dtype=np.float64),
            lam=0.0,
            boundary=[BoundaryCondition(0.0, 0.0), BoundaryCondition(half_pi, 1.0)],
            eigenvalue=0.0,
            stated_energy=math.pi / 4,
        )
    if case == "fig3":
        # u'' - u = 0, u(0) = 0, u(pi/2) = 1
        scale = math.sinh(half_pi)
        return AnalyticSolution(
            name=case, a=0.0, b=half_pi,
            u=lambda x: np.sinh(x) / scale,
            du=lambda x: np.cosh(x) / scale,
            d2u=lambda x: np.sinh(x) / scale,
            lam=-1.0,
            boundary=[BoundaryCondition(0.0, 0.0), BoundaryCondition(half_pi, 1.0)],
            eigenvalue=-1.0,
            stated_energy=math.tanh(math.pi / 4),
        )
    raise InvalidConfigError(
        f"unknown problem {case!r} (expected one of {', '.join(FIXED_LAMBDA_CASES)})",
        field="problem.preset",
    )


def problem_preset(name: str, num_outputs: int = 1,
                   mode: Optional[ProblemMode] = None) -> Tuple[ProblemSpec, Dict[str, float]]:
    """ProblemSpec for a named problem plus loss-weight defaults it implies."""
    if name in FIXED_LAMBDA_CASES:
        solution = analytic_fixed_lambda(name)
        spec = ProblemSpec(
            a=solution.a,
            b=solution.b,
            boundary=list(solution.boundary),
            mode=ProblemMode.FIXED_LAMBDA,
            eigenvalue=solution.lam,
            num_outputs=1,
            name=name,
        )
        # make the printed solution the minimizer of the energy term
        return spec, {"c": solution.energy()}
    if name == "dirichlet":
        if mode is None:
            mode = ProblemMode.SINGLE_PAIR if num_outputs == 1 else ProblemMode.MULTI_PAIR
        spec = ProblemSpec(
            a=0.0,
            b=math.pi,
            boundary=[BoundaryCondition(0.0, 0.0), BoundaryCondition(math.pi, 0.0)],
            mode=mode,
            num_outputs=num_outputs,
            name=name,
        )
        return spec, {}
    raise InvalidConfigError(
        f"unknown preset {name!r} (expected one of {', '.join(PRESETS)})",
        field="problem.preset",
    )


def _homogeneous_dirichlet(spec: ProblemSpec) -> bool:
    ends = {("a" if math.isclose(bc.x, spec.a) else "b") for bc in spec.boundary}
    return ends == {"a", "b"} and all(bc.value == 0.0 for bc in spec.boundary)


def reference_solutions(spec: ProblemSpec) -> List[AnalyticSolution]:
    """Ground truth the oracle knows for this problem, one per output; may be empty."""
    if spec.mode is ProblemMode.FIXED_LAMBDA:
        if spec.name in FIXED_LAMBDA_CASES:
            solution = analytic_fixed_lambda(spec.name)
            if (math.isclose(solution.a, spec.a) and math.isclose(solution.b, spec.b)
                    and math.isclose(solution.lam, spec.eigenvalue)):
                return [solution]
        return []
    if _homogeneous_dirichlet(spec):
        return [analytic_eigenpair(k, spec.a, spec.b) for k in range(1, spec.num_outputs + 1)]
    return []


def fd_eigenvalues(n: int, a: float = 0.0, b: float = math.pi) -> np.ndarray:
    """Ascending spectrum of the 3-point Dirichlet Laplacian on n interior points."""
    if n < 1:
        raise InvalidArgumentError(f"grid needs at least one interior point, got n={n}")
    if not a < b:
        raise InvalidArgumentError(f"interval must satisfy a < b, got [{a}, {b}]")
    h = (b - a) / (n + 1)
    j = np.arange(1, n + 1)
    return (2.0 / h**2) * (1.0 - np.cos(j * math.pi * h / (b - a)))


def fd_eigenvalues_dense(n: int, a: float = 0.0, b: float = math.pi) -> np.ndarray:
    """Same spectrum from a numerical tridiagonal eigen-solve."""
    if n < 1:
        raise InvalidArgumentError(f"grid needs at least one interior point, got n={n}")
    h = (b - a) / (n + 1)
    diag = np.full(n, 2.0 / h**2)
    off = np.full(n - 1, -1.0 / h**2)
    return linalg.eigh_tridiagonal(diag, off, eigvals_only=True)


def fd_convergence_rate(k: int, grid_sizes: Sequence[int], a: float = 0.0,
                        b: float = math.pi) -> float:
    """Observed order p in |lambda_h - lambda| ~ h^p for the k-th eigenvalue."""
    exact = (k * math.pi / (b - a)) ** 2
    hs, errs = [], []
    for n in grid_sizes:
        if n < k:
            raise InvalidArgumentError(f"grid size {n} has no eigenvalue number {k}")
        hs.append((b - a) / (n + 1))
        errs.append(abs(fd_eigenvalues(n, a, b)[k - 1] - exact))
    slope, _ = np.polyfit(np.log(hs), np.log(errs), 1)
    return float(slope)


def normalize_to_unit_energy(u_vals: np.ndarray, a: float, b: float) -> np.ndarray:
    e = energy(u_vals, a, b)
    if e <= 0:
        return np.asarray(u_vals, dtype=np.float64)
    return np.asarray(u_vals, dtype=np.float64) / math.sqrt(e)


def sign_invariant_l2_error(u_pred: np.ndarray, u_ref: np.ndarray, a: float, b: float) -> float:
    """min over s in {+1, -1} of the quadrature L2 norm of s * u_pred - u_ref."""
    u_pred = np.asarray(u_pred, dtype=np.float64)
    u_ref = np.asarray(u_ref, dtype=np.float64)
    best = math.inf
    for s in (1.0, -1.0):
        d = s * u_pred - u_ref
        best = min(best, math.sqrt(max(mc_inner(d, d, a, b), 0.0)))
    return best


def aligned_sign(u_pred: np.ndarray, u_ref: np.ndarray) -> float:
    """The sign s minimizing the distance between s * u_pred and u_ref."""
    return 1.0 if np.dot(u_pred, u_ref) >= 0 else -1.0


def max_abs_error(u_pred: np.ndarray, u_ref: np.ndarray, sign_invariant: bool = False) -> float:
    u_pred = np.asarray(u_pred, dtype=np.float64)
    u_ref = np.asarray(u_ref, dtype=np.float64)
    if sign_invariant:
        u_pred = aligned_sign(u_pred, u_ref) * u_pred
    return float(np.max(np.abs(u_pred - u_ref)))


def energy_check(solution: AnalyticSolution, rel_tol: float = 1e-3) -> bool:
    """Compare the exact energy with the stated one; mismatches are logged, not raised."""
    if solution.stated_energy is None:
        return True
    actual = solution.energy()
    ok = math.isclose(actual, solution.stated_energy, rel_tol=rel_tol)
    if not ok:
        logger.warning(
            "%s: energy %.6f differs from the stated %.6f",
            solution.name, actual, solution.stated_energy,
        )
    return ok
