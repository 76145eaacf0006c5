"""
1-D distance-IoU loss.

loss = 1 - IoU + (center distance)^2 / (enclosing length)^2
"""

import numpy as np

from ..core.exceptions import DataError
from ..tensor import Tensor, as_tensor, ops


def segment_diou_loss(pred_start, pred_end, target_start, target_end) -> Tensor:
    """
    Elementwise DIoU loss between segments [pred_start, pred_end] and targets.

    Args:
        pred_start, pred_end: Predicted bounds (N,) (Tensor or array)
        target_start, target_end: Target bounds (N,)

    Returns:
        Per-segment losses (N,)

    Raises:
        DataError: If a target segment has zero or negative length
    """
    ps, pe = as_tensor(pred_start), as_tensor(pred_end)
    ts, te = as_tensor(target_start), as_tensor(target_end)
    if np.any(te.data - ts.data <= 0):
        raise DataError('DIoU target segment has non-positive length')
    inter = ops.relu(ops.sub(ops.minimum(pe, te), ops.maximum(ps, ts)))
    union = ops.sub(ops.add(ops.sub(pe, ps), ops.sub(te, ts)), inter)
    iou = ops.div(inter, union)
    enclosing = ops.sub(ops.maximum(pe, te), ops.minimum(ps, ts))
    center_gap = ops.mul(ops.sub(ops.add(ps, pe), ops.add(ts, te)), 0.5)
    penalty = ops.div(ops.square(center_gap), ops.square(enclosing))
    return ops.add(ops.sub(1.0, iou), penalty)


def diou_loss(pred_offsets: Tensor, target_offsets: np.ndarray,
              anchors=None) -> Tensor:
    """
    Mean DIoU loss of offset pairs around anchor positions.

    Segments are [p - d_start, p + d_end]; the loss does not depend on p, so
    anchors default to zero.

    Args:
        pred_offsets: N x 2 positive offsets
        target_offsets: N x 2 positive offsets
        anchors: Optional anchor positions (N,)

    Returns:
        Scalar mean over the N rows (0 when N == 0)
    """
    pred_offsets = as_tensor(pred_offsets)
    target_offsets = np.asarray(target_offsets, dtype=np.float64).reshape(-1, 2)
    n = target_offsets.shape[0]
    if n == 0:
        return as_tensor(0.0)
    p = np.zeros(n) if anchors is None else np.asarray(anchors, dtype=np.float64)
    ps = ops.sub(p[:, None], ops.slice_cols(pred_offsets, 0, 1))
    pe = ops.add(p[:, None], ops.slice_cols(pred_offsets, 1, 2))
    ts = (p - target_offsets[:, 0])[:, None]
    te = (p + target_offsets[:, 1])[:, None]
    return ops.div(ops.sum(segment_diou_loss(ps, pe, ts, te)), float(n))
