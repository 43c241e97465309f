"""
Finite-difference references for derivative and gradient checks.
"""

from typing import Callable, Tuple

import numpy as np

from ..diffcore import MlpParams, ParamGrad, forward_jet


def central_difference(f: Callable[[float], float], x: float, h: float,
                       order: int = 1, richardson: bool = True) -> float:
    """First or second derivative of f at x by central differences.

    With ``richardson`` the step-h and step-h/2 estimates are combined to cancel
    the leading h^2 error term.
    """
    def estimate(step: float) -> float:
        if order == 1:
            return (f(x + step) - f(x - step)) / (2.0 * step)
        if order == 2:
            return (f(x + step) - 2.0 * f(x) + f(x - step)) / (step * step)
        raise ValueError(f"order must be 1 or 2, got {order}")

    if not richardson:
        return estimate(h)
    return (4.0 * estimate(h / 2.0) - estimate(h)) / 3.0


def relative_error(actual: np.ndarray, expected: np.ndarray, floor: float = 1.0) -> float:
    """max |actual - expected| / max(|expected|, |actual|, floor), elementwise."""
    actual = np.asarray(actual, dtype=np.float64)
    expected = np.asarray(expected, dtype=np.float64)
    scale = np.maximum(np.maximum(np.abs(actual), np.abs(expected)), floor)
    return float(np.max(np.abs(actual - expected) / scale))


def jet_fd_errors(params: MlpParams, xs: np.ndarray, h: float = 1e-4,
                  h2: float = 1e-3) -> Tuple[float, float]:
    """Worst relative error of d1 and d2 against finite differences of the values.

    The second difference divides by the squared step, so it gets the larger
    step ``h2`` to keep rounding below the extrapolated truncation error.
    """
    jets = forward_jet(params, np.asarray(xs, dtype=np.float64))
    worst_d1 = worst_d2 = 0.0
    for n, x in enumerate(np.asarray(xs, dtype=np.float64)):
        for i in range(params.num_outputs):
            def value(t: float, i: int = i) -> float:
                return float(forward_jet(params, t).v[i])

            fd1 = central_difference(value, float(x), h, order=1)
            fd2 = central_difference(value, float(x), h2, order=2)
            worst_d1 = max(worst_d1, relative_error(jets.d1[n, i], fd1))
            worst_d2 = max(worst_d2, relative_error(jets.d2[n, i], fd2))
    return worst_d1, worst_d2


def param_gradient_fd(loss: Callable[[MlpParams], float], params: MlpParams,
                      h: float = 1e-5) -> ParamGrad:
    """Per-parameter central differences of a scalar loss."""
    grad = ParamGrad.zeros_like(params)
    perturbed = params.copy()
    for (_, target), (_, out) in zip(perturbed.blocks(), grad.blocks()):
        for idx in np.ndindex(target.shape):
            original = target[idx]

            def shifted(delta: float) -> float:
                target[idx] = original + delta
                return loss(perturbed)

            out[idx] = central_difference(shifted, 0.0, h, order=1)
            target[idx] = original
    return grad


def gradient_fd_error(analytic: ParamGrad, numeric: ParamGrad, floor: float = 1.0) -> float:
    return max(relative_error(a, n, floor) for (_, a), (_, n) in
               zip(analytic.blocks(), numeric.blocks()))
