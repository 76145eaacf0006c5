"""
Finite-difference verification of tape gradients.
"""

from typing import Callable

import numpy as np

from config.settings import GRAD_CHECK_STEP
from ..core.exceptions import UsageError
from .tensor import ComputationTape, Tensor


def analytic_gradient(f: Callable[[], Tensor], x: Tensor) -> np.ndarray:
    """Run f on a fresh tape and return d f / d x."""
    saved_flag, saved_grad = x.requires_grad, x.grad
    x.requires_grad = True
    x.grad = None
    try:
        with ComputationTape() as tape:
            loss = f()
        tape.backward(loss)
        grad = x.grad if x.grad is not None else np.zeros_like(x.data)
    finally:
        x.requires_grad = saved_flag
        x.grad = saved_grad
    return grad


def numeric_gradient(f: Callable[[], Tensor], x: Tensor,
                     h: float = GRAD_CHECK_STEP) -> np.ndarray:
    """Central differences of f with respect to every component of x."""
    grad = np.zeros_like(x.data)
    flat = x.data.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + h
        upper = f().item()
        flat[i] = original - h
        lower = f().item()
        flat[i] = original
        out[i] = (upper - lower) / (2.0 * h)
    return grad


def grad_check(f: Callable[[], Tensor], x: Tensor,
               h: float = GRAD_CHECK_STEP) -> float:
    """
    Compare tape gradients against central differences.

    Args:
        f: Zero-argument function computing a scalar tensor from x (and
           anything else it closes over)
        x: Tensor whose gradient is checked; perturbed in place and restored
        h: Finite-difference step in (0, 1e-2]

    Returns:
        max over components of |analytic - numeric| / max(1, |analytic|)

    Raises:
        UsageError: If h is outside (0, 1e-2]
    """
    if not 0.0 < h <= 1e-2:
        raise UsageError(f'grad_check step {h} outside (0, 1e-2]')
    analytic = analytic_gradient(f, x)
    numeric = numeric_gradient(f, x, h)
    scale = np.maximum(1.0, np.abs(analytic))
    if analytic.size == 0:
        return 0.0
    return float(np.max(np.abs(analytic - numeric) / scale))
