"""
Terms of the composite eigenpair loss and their assembly over network jets.

The individual terms are plain functions on sampled values. ``composite_loss``
evaluates them for every network output and records the matching cotangents
(dL/du, dL/du'') in a ``LossGraph`` so ``diffcore.backward`` can produce exact
parameter gradients, including the paths through the Rayleigh quotient.
"""

import logging
from typing import List, Sequence, Tuple

import numpy as np

from .diffcore import Jet2, LossGraph, MlpParams, record_forward
from .errors import DegenerateFunctionError, InvalidArgumentError
from .models import Batch, LossBreakdown, LossWeights, ProblemSpec
from .sampling import mc_gram, mc_inner, energy

logger = logging.getLogger(__name__)

# Guard on <u, u> below which the Rayleigh quotient is considered undefined.
EPS_DENOMINATOR = 1e-12


def residual(jets: Jet2, lam: float) -> np.ndarray:
    """Pointwise u'' + lam * u."""
    return np.asarray(jets.d2, dtype=np.float64) + lam * np.asarray(jets.v, dtype=np.float64)


def residual_l2(r: np.ndarray, a: float, b: float) -> float:
    return mc_inner(r, r, a, b)


def _top_k_indices(r: np.ndarray, k: int) -> np.ndarray:
    # stable order so ties resolve identically on every run
    return np.argsort(-np.abs(r), kind="stable")[:k]


def residual_inf_topk(r: np.ndarray, k: int) -> float:
    """Mean of the k largest |r|, a smooth stand-in for the sup norm."""
    r = np.asarray(r, dtype=np.float64)
    if k < 1 or k > r.size:
        raise InvalidArgumentError(f"top-K needs 1 <= K <= {r.size}, got K={k}")
    return float(np.mean(np.abs(r[_top_k_indices(r, k)])))


def boundary_l1(preds: np.ndarray, targets: np.ndarray) -> float:
    preds = np.asarray(preds, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if preds.shape != targets.shape or preds.size == 0:
        raise InvalidArgumentError(
            f"boundary predictions {preds.shape} and targets {targets.shape} must match"
        )
    return float(np.mean(np.abs(preds - targets)))


def energy_penalty(e: float, beta: float, c: float) -> float:
    return beta * abs(e - c)


def rayleigh(u_vals: np.ndarray, lap_vals: np.ndarray, a: float, b: float,
             output: int = 0) -> float:
    """R(u) = -<u'', u> / <u, u>."""
    denom = mc_inner(u_vals, u_vals, a, b)
    if denom < EPS_DENOMINATOR:
        raise DegenerateFunctionError(
            f"output {output}: <u, u> = {denom:.3e} is below {EPS_DENOMINATOR:g}",
            output=output,
        )
    return -mc_inner(lap_vals, u_vals, a, b) / denom


def rayleigh_or_nan(u_vals: np.ndarray, lap_vals: np.ndarray, a: float, b: float) -> float:
    """Rayleigh quotient for diagnostics: NaN instead of an error on a vanishing u."""
    try:
        return rayleigh(u_vals, lap_vals, a, b)
    except DegenerateFunctionError:
        return float("nan")


def rayleigh_residual(jets: Jet2, r_value: float) -> np.ndarray:
    """Pointwise u'' + R(u) * u."""
    return residual(jets, r_value)


def ortho_penalty(outputs: Sequence[np.ndarray], nu: float, a: float, b: float) -> float:
    """nu * sum_{i<j} <u_i, u_j>^2."""
    if len(outputs) < 2:
        return 0.0
    gram = mc_gram(np.column_stack(outputs), a, b)
    upper = np.triu(gram, k=1)
    return float(nu * np.sum(upper * upper))


def param_reg(params: MlpParams, w: float) -> float:
    """w * sum of squared weights (biases excluded)."""
    if w == 0:
        return 0.0
    return float(w * sum(np.sum(m * m) for m in params.weights))


def _top_k_grad(r: np.ndarray, k: int) -> np.ndarray:
    g = np.zeros_like(r)
    idx = _top_k_indices(r, k)
    g[idx] = np.sign(r[idx]) / k
    return g


def composite_loss(params: MlpParams, batch: Batch, spec: ProblemSpec,
                   weights: LossWeights,
                   detach_rayleigh: bool = False) -> Tuple[LossBreakdown, LossGraph]:
    """Evaluate the full objective on one batch and record it for ``backward``.

    Fixed-lambda mode uses the given eigenvalue in the residual. The eigenpair
    modes substitute R(u_i) per output, add gamma_i * R(u_i)^2 and, for m > 1,
    the orthogonality penalty. The weight regularizer is added once.

    The boundary term is delta times the mean |u - u0| over the boundary batch,
    multiplied by the batch size when ``weights.boundary_reduction`` is "sum".
    """
    a, b = spec.a, spec.b
    m = params.num_outputs
    if spec.learns_eigenvalue and len(weights.gamma) != m:
        raise InvalidArgumentError(
            f"{len(weights.gamma)} Rayleigh weights for {m} network outputs"
        )

    interior = record_forward(params, batch.interior)
    edge = record_forward(params, batch.boundary_x)
    u = interior.output.v
    lap = interior.output.d2
    n = u.shape[0]
    quad = (b - a) / n
    # repeated endpoint draws act as a weight when the term is summed
    bnd_scale = float(batch.boundary_size) if weights.boundary_reduction == "sum" else 1.0

    g_v = np.zeros_like(u)
    g_d2 = np.zeros_like(u)
    g_edge = np.zeros_like(edge.output.v)

    res_l2 = res_inf = bnd = e_pen = 0.0
    rayleigh_pen: List[float] = []
    rayleigh_values: List[float] = []
    energies: List[float] = []

    for i in range(m):
        ui = u[:, i]
        li = lap[:, i]
        if spec.learns_eigenvalue:
            lam = rayleigh(ui, li, a, b, output=i)
            rayleigh_values.append(lam)
        else:
            lam = spec.eigenvalue
            rayleigh_values.append(rayleigh_or_nan(ui, li, a, b))
            rayleigh_pen.append(0.0)

        r = li + lam * ui
        res_l2 += weights.alpha * residual_l2(r, a, b)
        res_inf += weights.mu * residual_inf_topk(r, weights.top_k)
        g_r = weights.alpha * 2.0 * quad * r + weights.mu * _top_k_grad(r, weights.top_k)

        diff = edge.output.v[:, i] - batch.boundary_target
        bnd += weights.delta * bnd_scale * boundary_l1(edge.output.v[:, i], batch.boundary_target)
        g_edge[:, i] = weights.delta * bnd_scale * np.sign(diff) / diff.size

        e = energy(ui, a, b)
        energies.append(e)
        e_pen += energy_penalty(e, weights.beta, weights.c)
        g_v[:, i] += weights.beta * np.sign(e - weights.c) * 2.0 * quad * ui

        g_d2[:, i] += g_r
        g_v[:, i] += lam * g_r

        if spec.learns_eigenvalue:
            gamma = weights.gamma[i]
            rayleigh_pen.append(gamma * lam * lam)
            # detaching only freezes R inside the residual; the magnitude
            # penalty always differentiates through R
            g_lam = 2.0 * gamma * lam
            if not detach_rayleigh:
                g_lam += float(np.dot(g_r, ui))
            denom = float(np.dot(ui, ui))
            g_v[:, i] += g_lam * (-li - 2.0 * lam * ui) / denom
            g_d2[:, i] += g_lam * (-ui) / denom

    ortho = 0.0
    if spec.learns_eigenvalue and m > 1:
        ortho = ortho_penalty(list(u.T), weights.nu, a, b)
        upper = np.triu(mc_gram(u, a, b), k=1)
        sym = upper + upper.T
        g_v += 2.0 * weights.nu * quad * (u @ sym)

    reg = param_reg(params, weights.reg)
    total = res_l2 + res_inf + bnd + e_pen + sum(rayleigh_pen) + ortho + reg

    graph = LossGraph(weight_decay=weights.reg)
    graph.add(interior, Jet2(g_v, np.zeros_like(u), g_d2))
    graph.add(edge, Jet2(g_edge, np.zeros_like(g_edge), np.zeros_like(g_edge)))

    breakdown = LossBreakdown(
        residual_l2=res_l2,
        residual_inf=res_inf,
        boundary=bnd,
        energy_pen=e_pen,
        rayleigh_pen=rayleigh_pen,
        ortho=ortho,
        reg=reg,
        total=total,
        rayleigh=rayleigh_values,
        energy=energies,
    )
    return breakdown, graph
