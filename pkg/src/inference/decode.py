"""
Turn per-level head outputs into scored segments.

Timestep t of level m sits at grid position p = t * stride + 1 and predicts
[p - stride * d_start, p + stride * d_end], clamped to [1, T].
"""

from typing import List, Optional, Sequence

import numpy as np

from config.settings import PRE_NMS_TOPK, SCORE_THRESH
from ..core.exceptions import UsageError
from ..losses.assignment import grid_positions
from ..tensor.ops import stable_sigmoid
from .detection import Detection


def _array(x) -> np.ndarray:
    return np.asarray(getattr(x, 'data', x), dtype=np.float64)


def decode(logits: Sequence, offsets: Sequence, score_thresh: float = SCORE_THRESH,
           pre_nms_topk: int = PRE_NMS_TOPK, masks: Optional[Sequence] = None,
           T: Optional[float] = None,
           class_ids: Optional[Sequence[int]] = None) -> List[Detection]:
    """
    Decode detections of one sequence.

    Args:
        logits: Per-level T_m x A logits (arrays or Tensors)
        offsets: Per-level T_m x 2 positive offsets in stride units
        score_thresh: Keep (t, a) with sigmoid(logit) >= score_thresh
        pre_nms_topk: Keep at most this many detections overall
        masks: Per-level validity; padded timesteps never produce detections
        T: Upper clamp bound (default: level-1 length)
        class_ids: Column -> original class id (default: column index)

    Returns:
        Detections sorted by score descending (ties: smaller start, then
        smaller class id)
    """
    if not 0.0 < score_thresh < 1.0:
        raise UsageError(f'score_thresh {score_thresh} outside (0, 1)')
    if pre_nms_topk < 1:
        raise UsageError('pre_nms_topk must be at least 1')
    if len(logits) != len(offsets):
        raise UsageError('logits and offsets disagree on the level count')
    if not logits:
        return []
    if T is None:
        T = float(_array(logits[0]).shape[0])
    scores, starts, ends, columns = [], [], [], []
    for m, (level_logits, level_offsets) in enumerate(zip(logits, offsets)):
        z = _array(level_logits)
        d = _array(level_offsets)
        stride = 2 ** m
        prob = stable_sigmoid(z)
        keep = prob >= score_thresh
        if masks is not None:
            keep &= np.asarray(masks[m], dtype=bool)[:, None]
        t_idx, a_idx = np.nonzero(keep)
        if t_idx.size == 0:
            continue
        p = grid_positions(z.shape[0], stride)[t_idx]
        starts.append(np.clip(p - stride * d[t_idx, 0], 1.0, T))
        ends.append(np.clip(p + stride * d[t_idx, 1], 1.0, T))
        scores.append(prob[t_idx, a_idx])
        columns.append(a_idx)
    if not scores:
        return []
    scores = np.concatenate(scores)
    starts = np.concatenate(starts)
    ends = np.concatenate(ends)
    columns = np.concatenate(columns)
    nondegenerate = ends > starts
    scores, starts, ends, columns = (x[nondegenerate] for x in (scores, starts, ends, columns))
    ids = columns if class_ids is None else np.asarray(class_ids)[columns]
    order = np.lexsort((ids, starts, -scores))[:pre_nms_topk]
    return [Detection(float(starts[i]), float(ends[i]), int(ids[i]), float(scores[i]))
            for i in order]
