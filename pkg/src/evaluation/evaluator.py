"""
Dataset-level evaluation: AP per class and threshold, mAP per vocabulary split.

mAP of a split is the mean over its classes that have ground truth, then the
mean over thresholds. mAP_all is taken over every evaluable class, so it is
not the mean of mAP_base and mAP_novel.
"""

import logging
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.runtime_settings import DEFAULT_THREADS
from config.settings import TIOU_GRID_DEFAULT
from ..core.constants import SPLIT_BASE, SPLIT_NOVEL
from ..core.exceptions import ConfigurationError, DataError
from ..core.validators import ConfigValidator
from ..datasets.types import VideoFeatures
from ..inference.detection import ranking_key
from .average_precision import average_precision, match_detections

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvalConfig:
    """
    Attributes:
        tiou_grid: Strictly increasing thresholds in (0, 1]
        top_k: Optional cap on detections per video
    """
    tiou_grid: Tuple[float, ...] = TIOU_GRID_DEFAULT
    top_k: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, 'tiou_grid', tuple(float(t) for t in self.tiou_grid))
        is_valid, error = ConfigValidator.validate_tiou_grid(self.tiou_grid)
        if not is_valid:
            raise ConfigurationError(error)
        if self.top_k is not None and self.top_k < 1:
            raise ConfigurationError('top_k: must be at least 1')

    def to_dict(self) -> dict:
        return {'tiou_grid': list(self.tiou_grid), 'top_k': self.top_k}


@dataclass
class ClassAP:
    class_id: int
    split: str
    ap_by_threshold: List[Optional[float]]

    @property
    def evaluable(self) -> bool:
        return self.ap_by_threshold[0] is not None if self.ap_by_threshold else False


@dataclass(frozen=True)
class DetectionLabel:
    """TP/FP outcome of one detection at every threshold."""
    video_id: str
    class_id: int
    start: float
    end: float
    score: float
    tp: Tuple[bool, ...]


@dataclass
class EvalReport:
    config: dict
    per_class: List[ClassAP] = field(default_factory=list)
    map_base: Optional[float] = None
    map_novel: Optional[float] = None
    map_all: Optional[float] = None
    labels: List[DetectionLabel] = field(default_factory=list)

    def class_ap(self, class_id: int) -> ClassAP:
        for entry in self.per_class:
            if entry.class_id == class_id:
                return entry
        raise KeyError(class_id)

    def summary(self) -> dict:
        return {'map_base': self.map_base, 'map_novel': self.map_novel,
                'map_all': self.map_all}


def split_map(per_class: Sequence[ClassAP], n_thresholds: int,
              split: Optional[str] = None) -> Optional[float]:
    """Class mean per threshold (evaluable classes only), then threshold mean."""
    chosen = [c for c in per_class if c.evaluable and (split is None or c.split == split)]
    if not chosen:
        return None
    per_threshold = [np.mean([c.ap_by_threshold[k] for c in chosen])
                     for k in range(n_thresholds)]
    return float(np.mean(per_threshold))


def evaluate(predictions: Dict[str, Sequence], videos: Sequence[VideoFeatures], vocab,
             cfg: EvalConfig = EvalConfig(), threads: int = DEFAULT_THREADS) -> EvalReport:
    """
    Score predictions against the annotations of a dataset.

    Args:
        predictions: video_id -> Detection list
        videos: Annotated dataset
        vocab: Vocabulary with base/novel split tags
        cfg: Thresholds and optional per-video cap
        threads: Workers for per-class AP

    Returns:
        EvalReport with per-class AP, split mAPs and per-detection labels

    Raises:
        DataError: On an unknown class id or video id in the predictions
    """
    known_videos = {v.video_id for v in videos}
    gts: Dict[int, Dict[str, List[Tuple[float, float]]]] = defaultdict(lambda: defaultdict(list))
    for video in videos:
        for ann in video.annotations:
            if ann.class_id not in vocab:
                raise DataError(f'video {video.video_id}: class {ann.class_id} not in vocabulary')
            gts[ann.class_id][video.video_id].append((ann.start, ann.end))

    dets: Dict[int, List[Tuple[str, float, float, float]]] = defaultdict(list)
    for video_id, video_dets in predictions.items():
        if video_id not in known_videos:
            raise DataError(f'predictions for unknown video {video_id}')
        ranked = sorted(video_dets, key=ranking_key)
        if cfg.top_k is not None:
            ranked = ranked[:cfg.top_k]
        for det in ranked:
            if det.class_id not in vocab:
                raise DataError(f'video {video_id}: predicted class {det.class_id} '
                                'is not in the vocabulary')
            dets[det.class_id].append((video_id, det.start, det.end, det.score))

    grid = cfg.tiou_grid
    class_ids = [entry.class_id for entry in vocab]

    def score_class(class_id: int):
        class_dets = dets.get(class_id, [])
        class_gts = gts.get(class_id, {})
        aps = [average_precision(class_dets, class_gts, t) for t in grid]
        flags = []
        for t in grid:
            order, tp = match_detections(class_dets, class_gts, t)
            flags.append(dict(zip(order, tp.tolist())))
        labels = [
            DetectionLabel(vid, class_id, s, e, score,
                           tuple(bool(f[i]) for f in flags))
            for i, (vid, s, e, score) in enumerate(class_dets)
        ]
        return ClassAP(class_id, vocab.split_of(class_id), aps), labels

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(score_class, class_ids))

    report = EvalReport(config=cfg.to_dict())
    for class_ap, labels in results:
        report.per_class.append(class_ap)
        report.labels.extend(labels)
    report.map_base = split_map(report.per_class, len(grid), SPLIT_BASE)
    report.map_novel = split_map(report.per_class, len(grid), SPLIT_NOVEL)
    report.map_all = split_map(report.per_class, len(grid))
    skipped = [c.class_id for c in report.per_class if not c.evaluable]
    if skipped:
        logger.info('classes without ground truth (null AP): %s', skipped)
    logger.info('mAP base=%s novel=%s all=%s', report.map_base, report.map_novel,
                report.map_all)
    return report
