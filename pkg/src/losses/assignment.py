"""
Training-target assignment on the feature pyramid.

Timestep t (0-based) of level m (1-based) sits at grid position p = t * 2^(m-1) + 1.
It is positive for an annotation [s, e] when p lies in the central
center_ratio part of the segment, strictly inside it, and the larger of the
two distances, measured in level strides, falls in that level's range.
Several candidates resolve to the shortest annotation; every annotation of
that shortest length sets its class bit.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.settings import CENTER_RATIO, REGRESSION_RANGES
from ..core.exceptions import DataError, UsageError

Range = Tuple[float, float]


@dataclass
class LevelTargets:
    """
    Targets for one pyramid level.

    Attributes:
        classes: T_m x A multi-hot class targets
        positive: Boolean (T_m,)
        offsets: T_m x 2 (d_start, d_end) in stride units; zero on negatives
        matched: Index of the matched annotation, -1 on negatives
        positions: Grid position p of every timestep
        stride: 2^(m-1)
        valid: Boolean validity mask (T_m,)
    """
    classes: np.ndarray
    positive: np.ndarray
    offsets: np.ndarray
    matched: np.ndarray
    positions: np.ndarray
    stride: int
    valid: np.ndarray


@dataclass
class TargetAssignment:
    levels: List[LevelTargets] = field(default_factory=list)

    @property
    def num_positive(self) -> int:
        return int(sum(int(level.positive.sum()) for level in self.levels))


def default_level_ranges(levels: int) -> List[Range]:
    """
    Geometric ranges per level in that level's stride units.

    REGRESSION_RANGES bound the raw grid distance: (0, 4], (4, 8], (8, 16], ...
    Level m covers the m-th of these divided by its stride 2^(m-1), so the
    levels tile the distance axis without gaps. The last level is open-ended.
    """
    grid: List[Range] = []
    for m in range(levels):
        if m < len(REGRESSION_RANGES) and math.isfinite(REGRESSION_RANGES[m][1]):
            grid.append(REGRESSION_RANGES[m])
        else:
            lo = grid[-1][1] if grid else 0.0
            grid.append((lo, 2.0 * lo if lo > 0 else 4.0))
    grid[-1] = (grid[-1][0], math.inf)
    return [(lo / 2 ** m, hi / 2 ** m) for m, (lo, hi) in enumerate(grid)]


def grid_positions(length: int, stride: int) -> np.ndarray:
    """1-based grid position of each timestep at a given stride."""
    return np.arange(length, dtype=np.float64) * stride + 1.0


def assign_targets(annotations: Sequence, level_lengths: Sequence[int],
                   class_columns: Dict[int, int],
                   center_ratio: float = CENTER_RATIO,
                   level_ranges: Optional[Sequence[Range]] = None,
                   masks: Optional[Sequence[np.ndarray]] = None) -> TargetAssignment:
    """
    Assign class and regression targets to every pyramid timestep.

    Args:
        annotations: ActionAnnotation list (1-based grid units)
        level_lengths: T_m per level
        class_columns: Original class id -> logit column
        center_ratio: Central fraction of a segment eligible as positives
        level_ranges: (lo, hi] bounds on max offset per level, in stride units
        masks: Optional validity per level; invalid timesteps stay negative

    Returns:
        TargetAssignment

    Raises:
        UsageError: If ranges do not match the level count
        DataError: If an annotation's class has no column
    """
    if level_ranges is None:
        level_ranges = default_level_ranges(len(level_lengths))
    if len(level_ranges) != len(level_lengths):
        raise UsageError(
            f'{len(level_ranges)} regression ranges for {len(level_lengths)} levels'
        )
    num_classes = len(class_columns)
    n = len(annotations)
    starts = np.array([a.start for a in annotations], dtype=np.float64)
    ends = np.array([a.end for a in annotations], dtype=np.float64)
    columns = []
    for a in annotations:
        if a.class_id not in class_columns:
            raise DataError(f'annotation class {a.class_id} is not in the active vocabulary')
        columns.append(class_columns[a.class_id])
    columns = np.array(columns, dtype=np.int64)
    centers = 0.5 * (starts + ends)
    radius = 0.5 * center_ratio * (ends - starts)
    lengths = ends - starts

    assignment = TargetAssignment()
    for m, T_m in enumerate(level_lengths):
        stride = 2 ** m
        p = grid_positions(T_m, stride)
        valid = (np.ones(T_m, dtype=bool) if masks is None
                 else np.asarray(masks[m], dtype=bool))
        classes = np.zeros((T_m, num_classes))
        positive = np.zeros(T_m, dtype=bool)
        offsets = np.zeros((T_m, 2))
        matched = np.full(T_m, -1, dtype=np.int64)
        if n:
            left = p[:, None] - starts[None, :]
            right = ends[None, :] - p[:, None]
            lo, hi = level_ranges[m]
            reach = np.maximum(left, right) / stride
            candidate = (
                (left > 0) & (right > 0)
                & (np.abs(p[:, None] - centers[None, :]) <= radius[None, :])
                & (reach > lo) & (reach <= hi)
                & valid[:, None]
            )
            masked_len = np.where(candidate, lengths[None, :], np.inf)
            shortest = masked_len.min(axis=1)
            positive = np.isfinite(shortest)
            for t in np.flatnonzero(positive):
                winners = np.flatnonzero(masked_len[t] == shortest[t])
                classes[t, columns[winners]] = 1.0
                i = int(winners[0])
                matched[t] = i
                offsets[t] = (left[t, i] / stride, right[t, i] / stride)
        assignment.levels.append(
            LevelTargets(classes, positive, offsets, matched, p, stride, valid)
        )
    return assignment
