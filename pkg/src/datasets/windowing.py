"""
Fixed-length windows over untrimmed videos.

Short videos are zero-padded with a validity mask. Long videos are cut into
windows of max_len with 25% overlap; the last window is aligned to the video
end. Annotations are clipped to each window and dropped when less than one
grid unit survives, so an action near a window seam may appear in both
neighbouring windows.
"""

from typing import List

import numpy as np

from config.settings import WINDOW_OVERLAP
from ..core.exceptions import UsageError
from .types import ActionAnnotation, VideoFeatures


def window_offsets(T: int, max_len: int, overlap: float = WINDOW_OVERLAP) -> List[int]:
    """
    Window start offsets (0-based) covering T timesteps.

    Returns:
        [0] when T <= max_len, otherwise starts stepping by
        max_len - floor(overlap * max_len) with a final end-aligned window
    """
    if max_len < 1:
        raise UsageError('max_len must be at least 1')
    if T <= max_len:
        return [0]
    step = max(1, max_len - int(overlap * max_len))
    offsets = list(range(0, T - max_len + 1, step))
    if offsets[-1] != T - max_len:
        offsets.append(T - max_len)
    return offsets


def clip_annotation(ann: ActionAnnotation, offset: int, length: int):
    """Clip to grid positions offset+1..offset+length and shift to local coordinates."""
    start = max(ann.start, offset + 1.0) - offset
    end = min(ann.end, float(offset + length)) - offset
    if end - start < 1.0:
        return None
    return ActionAnnotation(start, end, ann.class_id)


def pad_or_window(v: VideoFeatures, max_len: int,
                  overlap: float = WINDOW_OVERLAP) -> List[VideoFeatures]:
    """
    Bring a video to exactly max_len timesteps.

    Args:
        v: Source video (mask all-valid)
        max_len: Target length
        overlap: Fractional overlap of consecutive windows

    Returns:
        One padded sequence, or several windows for long inputs
    """
    T = v.length
    out = []
    for offset in window_offsets(T, max_len, overlap):
        valid = min(max_len, T - offset)
        snippet = np.zeros((max_len, v.snippet.shape[1]))
        frame = np.zeros((max_len, v.frame.shape[1]))
        snippet[:valid] = v.snippet[offset:offset + valid]
        frame[:valid] = v.frame[offset:offset + valid]
        mask = np.zeros(max_len, dtype=bool)
        mask[:valid] = v.mask[offset:offset + valid]
        annotations = []
        for ann in v.annotations:
            clipped = clip_annotation(ann, offset, valid)
            if clipped is not None:
                annotations.append(clipped)
        out.append(VideoFeatures(v.video_id, snippet, frame, annotations,
                                 mask=mask, offset=v.offset + offset))
    return out
