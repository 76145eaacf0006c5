"""
Video feature containers.

Time is measured on the feature grid and indexed from 1, as in the manifest:
timestep t of a feature array (0-based index) sits at grid position t + 1.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..core.exceptions import DataError


@dataclass(frozen=True)
class ActionAnnotation:
    """One action instance {s, e, a} in 1-based grid units."""
    start: float
    end: float
    class_id: int

    @property
    def length(self) -> float:
        return self.end - self.start

    def validate(self, T: float, video_id: str = '') -> None:
        """
        Check 1 <= start < end <= T.

        Raises:
            DataError: Naming the video when the bounds are violated
        """
        if not (1.0 <= self.start < self.end <= T):
            raise DataError(
                f'video {video_id}: annotation [{self.start}, {self.end}] '
                f'(class {self.class_id}) violates 1 <= s < e <= {T}'
            )


@dataclass
class VideoFeatures:
    """
    Paired snippet-level and frame-level features of one (possibly windowed) video.

    Attributes:
        video_id: Source video id
        snippet: T x d_v array (X_V)
        frame: T x d_f array (X_F)
        annotations: Ground-truth actions in this sequence's coordinates
        mask: Boolean validity per timestep (False on padding)
        offset: Grid offset of this window inside the source video
    """
    video_id: str
    snippet: np.ndarray
    frame: np.ndarray
    annotations: List[ActionAnnotation] = field(default_factory=list)
    mask: Optional[np.ndarray] = None
    offset: int = 0

    def __post_init__(self):
        self.snippet = np.asarray(self.snippet, dtype=np.float64)
        self.frame = np.asarray(self.frame, dtype=np.float64)
        if self.snippet.ndim != 2 or self.frame.ndim != 2:
            raise DataError(f'video {self.video_id}: features must be 2-D')
        if self.snippet.shape[0] != self.frame.shape[0]:
            raise DataError(
                f'video {self.video_id}: snippet length {self.snippet.shape[0]} '
                f'!= frame length {self.frame.shape[0]}'
            )
        if self.mask is None:
            self.mask = np.ones(self.length, dtype=bool)
        self.mask = np.asarray(self.mask, dtype=bool)

    @property
    def length(self) -> int:
        return self.snippet.shape[0]

    @property
    def valid_length(self) -> int:
        return int(self.mask.sum())

    def validate(self) -> None:
        for ann in self.annotations:
            ann.validate(self.valid_length, self.video_id)


@dataclass
class DatasetManifest:
    """Dataset index as stored in manifest JSON."""
    name: str
    vocab_path: str
    role: str
    videos: List[dict] = field(default_factory=list)
