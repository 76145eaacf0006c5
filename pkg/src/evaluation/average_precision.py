"""
Average precision of temporal detections for one class at one tIoU threshold.
"""

from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..inference.nms import segment_ious

# (video_id, start, end, score)
ScoredSegment = Tuple[str, float, float, float]
Segments = Dict[str, Sequence[Tuple[float, float]]]


def ap_from_pr(precision: np.ndarray, recall: np.ndarray) -> float:
    """
    Area under the interpolated precision envelope (all-point).

    The envelope at recall r is the best precision at any recall >= r.
    """
    mprec = np.concatenate([[0.0], precision, [0.0]])
    mrec = np.concatenate([[0.0], recall, [1.0]])
    mprec = np.maximum.accumulate(mprec[::-1])[::-1]
    idx = np.flatnonzero(mrec[1:] != mrec[:-1]) + 1
    return float(np.sum((mrec[idx] - mrec[idx - 1]) * mprec[idx]))


def rank_detections(dets: Sequence[ScoredSegment]) -> List[int]:
    """Indices by descending score; ties by smaller start, then smaller video id."""
    return sorted(range(len(dets)), key=lambda i: (-dets[i][3], dets[i][1], dets[i][0]))


def match_detections(dets: Sequence[ScoredSegment], gts: Segments,
                     tiou_thresh: float) -> Tuple[List[int], np.ndarray]:
    """
    Greedy one-to-one matching in ranking order.

    Each detection takes the unmatched ground truth of its video with the
    highest tIoU (first one on ties) when that tIoU >= tiou_thresh.

    Returns:
        (ranking order, TP flag per ranked detection)
    """
    order = rank_detections(dets)
    gt_arrays = {
        vid: (np.array([s for s, _ in segs], dtype=np.float64),
              np.array([e for _, e in segs], dtype=np.float64))
        for vid, segs in gts.items()
    }
    used = {vid: np.zeros(len(segs), dtype=bool) for vid, segs in gts.items()}
    tp = np.zeros(len(order), dtype=bool)
    for rank, i in enumerate(order):
        video_id, start, end, _ = dets[i]
        if video_id not in gt_arrays or gt_arrays[video_id][0].size == 0:
            continue
        starts, ends = gt_arrays[video_id]
        ious = segment_ious((start, end), starts, ends)
        ious[used[video_id]] = -1.0
        best = int(np.argmax(ious))
        if ious[best] >= tiou_thresh:
            used[video_id][best] = True
            tp[rank] = True
    return order, tp


def average_precision(dets: Sequence[ScoredSegment], gts: Segments,
                      tiou_thresh: float) -> Optional[float]:
    """
    AP of one class.

    Args:
        dets: Detections of the class over all videos
        gts: video_id -> ground-truth (start, end) segments of the class
        tiou_thresh: Minimum tIoU for a true positive

    Returns:
        AP in [0, 1]; None when the class has no ground truth
    """
    n_gt = sum(len(segs) for segs in gts.values())
    if n_gt == 0:
        return None
    if not dets:
        return 0.0
    _, tp = match_detections(dets, gts, tiou_thresh)
    tp_cum = np.cumsum(tp)
    fp_cum = np.cumsum(~tp)
    recall = tp_cum / n_gt
    precision = tp_cum / (tp_cum + fp_cum)
    return ap_from_pr(precision, recall)
