"""
Adam and the step-decay learning-rate schedule.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .diffcore import MlpParams, ParamGrad
from .errors import InvalidArgumentError, NumericError
from .models import LrSchedule

logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    """First/second moment estimates and the step counter."""
    m: ParamGrad
    v: ParamGrad
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(cls, params: MlpParams) -> "AdamState":
        return cls(ParamGrad.zeros_like(params), ParamGrad.zeros_like(params))


def adam_step(params: MlpParams, grads: ParamGrad, state: AdamState,
              lr: float) -> Tuple[MlpParams, AdamState]:
    """One bias-corrected Adam update. Returns new params and state; inputs are untouched."""
    if not lr > 0:
        raise InvalidArgumentError(f"learning rate must be > 0, got {lr}")
    grads.check_finite()

    t = state.t + 1
    b1, b2 = state.beta1, state.beta2
    corr1 = 1.0 - b1**t
    corr2 = 1.0 - b2**t

    new_w, new_b = [], []
    m_w, m_b, v_w, v_b = [], [], [], []
    for p_list, g_list, m_list, v_list, out_p, out_m, out_v in (
        (params.weights, grads.weights, state.m.weights, state.v.weights, new_w, m_w, v_w),
        (params.biases, grads.biases, state.m.biases, state.v.biases, new_b, m_b, v_b),
    ):
        for p, g, m, v in zip(p_list, g_list, m_list, v_list):
            m = b1 * m + (1.0 - b1) * g
            v = b2 * v + (1.0 - b2) * g * g
            m_hat = m / corr1
            v_hat = v / corr2
            out_p.append(p - lr * m_hat / (np.sqrt(v_hat) + state.eps))
            out_m.append(m)
            out_v.append(v)

    new_state = AdamState(ParamGrad(m_w, m_b), ParamGrad(v_w, v_b), t,
                          state.beta1, state.beta2, state.eps)
    try:
        new_params = MlpParams(new_w, new_b)
    except NumericError:
        logger.error("Adam step produced non-finite parameters at t=%d", t)
        raise
    return new_params, new_state


def lr_at(schedule: LrSchedule, epoch: int) -> float:
    """lr0 * decay ** floor(epoch / period), never below lr_min."""
    if epoch < 0:
        raise InvalidArgumentError(f"epoch must be >= 0, got {epoch}")
    return max(schedule.lr_min, schedule.lr0 * schedule.decay ** (epoch // schedule.period))


def clip_by_global_norm(grads: ParamGrad, max_norm: Optional[float]) -> ParamGrad:
    """Rescale the gradient so its global L2 norm is at most max_norm."""
    if max_norm is None:
        return grads
    norm = grads.global_norm()
    if norm > max_norm and math.isfinite(norm):
        logger.debug("Clipping gradient norm %.3e to %.3e", norm, max_norm)
        return grads.scaled(max_norm / norm)
    return grads
