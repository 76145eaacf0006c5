"""
Adaptive-moment optimizer with decoupled weight decay.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from config.settings import ADAM_BETA1, ADAM_BETA2, ADAM_EPS, GRAD_CLIP, WEIGHT_DECAY
from ..core.constants import NO_DECAY_SUFFIXES
from ..core.exceptions import DimensionError, NumericError, UsageError
from ..model.params import ModelParams, to_storage

logger = logging.getLogger(__name__)


@dataclass
class AdamWState:
    """
    First and second moment estimates per parameter name.

    Attributes:
        step: Number of updates applied so far
        m: name -> first moment
        v: name -> second moment
    """
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS
    weight_decay: float = WEIGHT_DECAY
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)


def decays(name: str) -> bool:
    """Norm gains, biases and the similarity scale are not decayed."""
    return not name.endswith(NO_DECAY_SUFFIXES)


def global_norm(grads: Dict[str, np.ndarray]) -> float:
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))


def clip_gradients(grads: Dict[str, np.ndarray],
                   max_norm: float) -> Tuple[Dict[str, np.ndarray], float]:
    """
    Rescale all gradients together so their global L2 norm is at most max_norm.

    Returns:
        (clipped gradients, norm before clipping)
    """
    if not max_norm > 0:
        raise UsageError('max_norm must be positive')
    norm = global_norm(grads)
    if norm <= max_norm:
        return grads, norm
    scale = max_norm / norm
    return {name: g * scale for name, g in grads.items()}, norm


def collect_gradients(params: ModelParams,
                      frozen: Iterable[str] = ()) -> Dict[str, np.ndarray]:
    """
    Gradients of every trainable parameter that received one.

    Raises:
        NumericError: Naming the first tensor with a NaN or Inf gradient
    """
    frozen = set(frozen)
    grads = {}
    for name, tensor in params.items():
        if name in frozen or tensor.grad is None:
            continue
        if tensor.grad.shape != tensor.shape:
            raise DimensionError(f'gradient of {name}', tensor.grad.shape, tensor.shape)
        if not np.all(np.isfinite(tensor.grad)):
            raise NumericError(name, 'non-finite gradient')
        grads[name] = tensor.grad
    return grads


def optimizer_step(params: ModelParams, state: AdamWState, lr: float,
                   grad_clip: float = GRAD_CLIP, frozen: Iterable[str] = (),
                   grads: Optional[Dict[str, np.ndarray]] = None) -> float:
    """
    Apply one clipped, bias-corrected update in place.

    Args:
        params: Parameters whose .grad holds the batch gradient
        state: Moment estimates, updated in place
        lr: Learning rate for this step
        grad_clip: Global-norm bound applied before the update
        frozen: Names that are neither updated nor decayed
        grads: Explicit gradients (default: read from params)

    Returns:
        Global gradient norm before clipping

    Raises:
        NumericError: If a gradient or an updated value is non-finite
    """
    if grads is None:
        grads = collect_gradients(params, frozen)
    else:
        frozen = set(frozen)
        grads = {n: g for n, g in grads.items() if n not in frozen}
        for name, g in grads.items():
            if not np.all(np.isfinite(g)):
                raise NumericError(name, 'non-finite gradient')
    grads, norm = clip_gradients(grads, grad_clip)

    state.step += 1
    bias1 = 1.0 - state.beta1 ** state.step
    bias2 = 1.0 - state.beta2 ** state.step
    for name, g in grads.items():
        tensor = params[name]
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None:
            m = np.zeros_like(tensor.data)
            v = np.zeros_like(tensor.data)
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * g * g
        state.m[name], state.v[name] = m, v
        update = (m / bias1) / (np.sqrt(v / bias2) + state.eps)
        if state.weight_decay and decays(name):
            update = update + state.weight_decay * tensor.data
        value = tensor.data - lr * update
        if not np.all(np.isfinite(value)):
            raise NumericError(name, 'non-finite parameter after update')
        tensor.data = to_storage(value)
    logger.debug('step %d lr=%.3g grad_norm=%.4g', state.step, lr, norm)
    return norm
