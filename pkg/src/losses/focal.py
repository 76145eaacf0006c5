"""
Sigmoid focal loss.
"""

from typing import Optional

import numpy as np

from config.settings import FOCAL_ALPHA, FOCAL_GAMMA
from ..core.exceptions import UsageError
from ..tensor import Tensor, ops


def focal_loss_elements(logits: Tensor, targets: np.ndarray,
                        alpha: Optional[float] = FOCAL_ALPHA,
                        gamma: float = FOCAL_GAMMA) -> Tensor:
    """
    FL(p_t) = -alpha_t (1 - p_t)^gamma log(p_t) per element.

    log(p_t) and log(1 - p_t) are evaluated as log-sigmoids of +-logit, so the
    loss stays finite for saturated logits.

    Args:
        logits: N x A
        targets: N x A in {0, 1}
        alpha: Positive-class weight; None disables alpha weighting
        gamma: Focusing exponent (>= 0)
    """
    if alpha is not None and not 0.0 < alpha <= 1.0:
        raise UsageError(f'alpha {alpha} outside (0, 1]')
    if gamma < 0:
        raise UsageError(f'gamma {gamma} must be non-negative')
    y = np.asarray(targets, dtype=np.float64)
    log_p = ops.log_sigmoid(logits)
    log_not_p = ops.log_sigmoid(ops.mul(logits, -1.0))
    log_pt = ops.add(ops.mul(log_p, y), ops.mul(log_not_p, 1.0 - y))
    log_one_minus_pt = ops.add(ops.mul(log_not_p, y), ops.mul(log_p, 1.0 - y))
    modulating = ops.exp(ops.mul(log_one_minus_pt, gamma))
    weight = 1.0 if alpha is None else alpha * y + (1.0 - alpha) * (1.0 - y)
    return ops.mul(ops.mul(modulating, log_pt), -weight)


def focal_loss(logits: Tensor, targets: np.ndarray,
               alpha: Optional[float] = FOCAL_ALPHA,
               gamma: float = FOCAL_GAMMA,
               normalizer: Optional[float] = None) -> Tensor:
    """
    Summed focal loss divided by the number of positive rows.

    Args:
        logits: N x A
        targets: N x A multi-hot
        alpha: Positive-class weight (None: no alpha weighting)
        gamma: Focusing exponent
        normalizer: Override for max(1, #rows with a set bit)

    Returns:
        Scalar tensor
    """
    if normalizer is None:
        targets = np.asarray(targets)
        num_pos = int((targets.reshape(targets.shape[0], -1).sum(axis=1) > 0).sum()) \
            if targets.size else 0
        normalizer = max(1, num_pos)
    total = ops.sum(focal_loss_elements(logits, targets, alpha, gamma))
    return ops.div(total, float(normalizer))
