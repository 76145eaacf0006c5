"""
Temporal IoU and greedy hard non-maximum suppression.
"""

from typing import List, Sequence, Tuple

import numpy as np

from config.settings import CLASS_AWARE_NMS, NMS_THRESH
from ..core.exceptions import UsageError
from .detection import Detection, ranking_key

Segment = Tuple[float, float]


def temporal_iou(a: Segment, b: Segment) -> float:
    """
    Intersection over union of two segments.

    Raises:
        UsageError: If either segment has end <= start
    """
    (s1, e1), (s2, e2) = a, b
    if not (e1 > s1 and e2 > s2):
        raise UsageError(f'degenerate segment in tIoU: {a}, {b}')
    inter = max(0.0, min(e1, e2) - max(s1, s2))
    return inter / ((e1 - s1) + (e2 - s2) - inter)


def segment_ious(segment: Segment, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
    """tIoU of one segment against many (vectorized; inputs non-degenerate)."""
    s, e = segment
    inter = np.clip(np.minimum(e, ends) - np.maximum(s, starts), 0.0, None)
    union = (e - s) + (ends - starts) - inter
    return inter / union


def nms(dets: Sequence[Detection], thresh: float = NMS_THRESH,
        class_aware: bool = CLASS_AWARE_NMS) -> List[Detection]:
    """
    Greedy suppression in ranking order.

    A remaining detection is dropped when its tIoU with a kept one exceeds
    thresh (compared within the same class only when class_aware).

    Returns:
        Kept detections, score descending
    """
    if not 0.0 < thresh <= 1.0:
        raise UsageError(f'NMS threshold {thresh} outside (0, 1]')
    ordered = sorted(dets, key=ranking_key)
    if not ordered:
        return []
    starts = np.array([d.start for d in ordered])
    ends = np.array([d.end for d in ordered])
    classes = np.array([d.class_id for d in ordered])
    alive = np.ones(len(ordered), dtype=bool)
    kept = []
    for i, det in enumerate(ordered):
        if not alive[i]:
            continue
        kept.append(det)
        rest = np.arange(i + 1, len(ordered))
        rest = rest[alive[rest]]
        if class_aware:
            rest = rest[classes[rest] == det.class_id]
        if rest.size:
            ious = segment_ious((det.start, det.end), starts[rest], ends[rest])
            alive[rest[ious > thresh]] = False
    return kept
