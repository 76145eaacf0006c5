"""
Joint detection loss: L = L_cls + lambda * L_reg.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from config.settings import FOCAL_ALPHA, FOCAL_GAMMA, REG_LOSS_WEIGHT
from ..core.exceptions import UsageError
from ..tensor import Tensor, as_tensor, ops
from .assignment import TargetAssignment
from .diou import diou_loss
from .focal import focal_loss


@dataclass
class LossBreakdown:
    total: Tensor
    cls: Tensor
    reg: Tensor

    def values(self):
        """(L_cls, L_reg, total) as floats."""
        return self.cls.item(), self.reg.item(), self.total.item()


def joint_loss(logits: Sequence[Tensor], offsets: Sequence[Tensor],
               assignment: TargetAssignment, lam: float = REG_LOSS_WEIGHT,
               alpha: Optional[float] = FOCAL_ALPHA,
               gamma: float = FOCAL_GAMMA) -> LossBreakdown:
    """
    Focal loss over valid timesteps plus DIoU loss over positives.

    Args:
        logits: Per-level T_m x A logits
        offsets: Per-level T_m x 2 offsets
        assignment: Targets for the same pyramid
        lam: Regression weight (>= 0)
        alpha: Focal alpha
        gamma: Focal gamma

    Returns:
        LossBreakdown; L_reg is 0 when there are no positives
    """
    if lam < 0:
        raise UsageError(f'loss weight {lam} must be non-negative')
    if not (len(logits) == len(offsets) == len(assignment.levels)):
        raise UsageError('logits, offsets and targets disagree on the level count')
    cls_rows, cls_targets, reg_rows, reg_targets = [], [], [], []
    for level_logits, level_offsets, targets in zip(logits, offsets, assignment.levels):
        valid = np.flatnonzero(targets.valid)
        if valid.size:
            cls_rows.append(ops.take_rows(level_logits, valid))
            cls_targets.append(targets.classes[valid])
        pos = np.flatnonzero(targets.positive)
        if pos.size:
            reg_rows.append(ops.take_rows(level_offsets, pos))
            reg_targets.append(targets.offsets[pos])
    num_pos = assignment.num_positive
    normalizer = max(1, num_pos)
    if cls_rows:
        cls = focal_loss(ops.concat_rows(cls_rows), np.concatenate(cls_targets),
                         alpha, gamma, normalizer=normalizer)
    else:
        cls = as_tensor(0.0)
    if reg_rows:
        reg = diou_loss(ops.concat_rows(reg_rows), np.concatenate(reg_targets))
    else:
        reg = as_tensor(0.0)
    total = ops.add(cls, ops.mul(reg, lam)) if lam != 0 else cls
    return LossBreakdown(total, cls, reg)
