"""
Synthetic untrimmed videos with planted actions.

Inside an action of class a, frame features are P_f z_a plus noise and snippet
features are a temporally smoothed P_v z_a plus noise, where z_a is the class
row of the SAME embedding table the model consumes. Background steps carry a
shared background prototype. P_f, P_v and the prototype come from a
projection seed shared by every dataset of an experiment.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config.runtime_settings import DEFAULT_THREADS
from config.settings import (
    FRAME_DIM,
    SNIPPET_DIM,
    SYNTH_MAX_ACTION_LEN,
    SYNTH_MIN_ACTION_LEN,
    SYNTH_SMOOTHING_WINDOW,
    SYNTH_SNR,
)
from ..core.exceptions import ConfigurationError
from ..core.seeding import derive_rng, unit_vector
from ..core.validators import ConfigValidator
from ..textbank.embeddings import ClassEmbeddingTable
from .types import ActionAnnotation, VideoFeatures

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SynthConfig:
    """Synthetic dataset parameters."""
    seed: int = 0
    n_videos: int = 16
    T: int = 128
    d_v: int = SNIPPET_DIM
    d_f: int = FRAME_DIM
    actions_per_video: int = 3
    min_len: int = SYNTH_MIN_ACTION_LEN
    max_len: int = SYNTH_MAX_ACTION_LEN
    snr: float = SYNTH_SNR
    projection_seed: int = 0
    video_prefix: str = 'video'

    def validate(self) -> None:
        """
        Raises:
            ConfigurationError: On out-of-range values or infeasible packing
        """
        is_valid, error = ConfigValidator.validate_synth(self)
        if not is_valid:
            raise ConfigurationError(error)


class FeatureProjection:
    """
    The synthetic "feature extractor": fixed random maps from embedding space.

    Args:
        projection_seed: Seed shared by all datasets of an experiment
        dim: Embedding width s
        d_v: Snippet feature width
        d_f: Frame feature width
    """

    def __init__(self, projection_seed: int, dim: int, d_v: int, d_f: int):
        self.p_f = derive_rng(projection_seed, 'P_f', dim, d_f).standard_normal((d_f, dim))
        self.p_v = derive_rng(projection_seed, 'P_v', dim, d_v).standard_normal((d_v, dim))
        background = unit_vector(derive_rng(projection_seed, 'background', dim), dim)
        self.background_f = self.p_f @ background
        self.background_v = self.p_v @ background

    def frame_prototypes(self, table: ClassEmbeddingTable) -> np.ndarray:
        """A x d_f matrix of noiseless within-action frame features."""
        return table.matrix @ self.p_f.T

    def snippet_prototypes(self, table: ClassEmbeddingTable) -> np.ndarray:
        return table.matrix @ self.p_v.T


def _smooth(signal: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average over time; edges average the available steps."""
    if window <= 1:
        return signal.copy()
    half = window // 2
    csum = np.vstack([np.zeros((1, signal.shape[1])), np.cumsum(signal, axis=0)])
    T = signal.shape[0]
    lo = np.clip(np.arange(T) - half, 0, T)
    hi = np.clip(np.arange(T) + half + 1, 0, T)
    return (csum[hi] - csum[lo]) / (hi - lo)[:, None]


def _place_actions(rng: np.random.Generator, cfg: SynthConfig) -> List[Tuple[int, int]]:
    """Non-overlapping (start_index, length) pairs with at least one gap step."""
    n = cfg.actions_per_video
    if n == 0:
        return []
    lengths = rng.integers(cfg.min_len, cfg.max_len + 1, size=n)
    free = cfg.T - int(lengths.sum()) - (n - 1)
    slack = rng.multinomial(free, np.full(n + 1, 1.0 / (n + 1)))
    placed = []
    cursor = int(slack[0])
    for i in range(n):
        placed.append((cursor, int(lengths[i])))
        cursor += int(lengths[i]) + 1 + int(slack[i + 1])
    return placed


def _generate_video(index: int, cfg: SynthConfig, table: ClassEmbeddingTable,
                    projection: FeatureProjection, class_ids: Sequence[int]) -> VideoFeatures:
    rng = derive_rng(cfg.seed, 'video', index)
    rows = table.column_of()
    clean_f = np.tile(projection.background_f, (cfg.T, 1))
    clean_v = np.tile(projection.background_v, (cfg.T, 1))
    annotations = []
    for start, length in _place_actions(rng, cfg):
        class_id = int(class_ids[rng.integers(len(class_ids))])
        z = table.matrix[rows[class_id]]
        clean_f[start:start + length] = projection.p_f @ z
        clean_v[start:start + length] = projection.p_v @ z
        annotations.append(ActionAnnotation(float(start + 1), float(start + length), class_id))
    sigma = 0.0 if math.isinf(cfg.snr) else 1.0 / cfg.snr
    frame = clean_f + sigma * rng.standard_normal(clean_f.shape)
    snippet = _smooth(clean_v, SYNTH_SMOOTHING_WINDOW) + sigma * rng.standard_normal(clean_v.shape)
    # Blobs store float32; keep generated values exactly representable
    frame = frame.astype(np.float32).astype(np.float64)
    snippet = snippet.astype(np.float32).astype(np.float64)
    return VideoFeatures(f'{cfg.video_prefix}_{index:05d}', snippet, frame, annotations)


def synth_generate(cfg: SynthConfig, table: ClassEmbeddingTable,
                   class_ids: Optional[Sequence[int]] = None,
                   threads: int = DEFAULT_THREADS) -> List[VideoFeatures]:
    """
    Generate a deterministic synthetic dataset.

    Args:
        cfg: Generation parameters
        table: Class embeddings the features are coupled to
        class_ids: Classes to plant (default: every table class)
        threads: Worker cap

    Returns:
        Videos in index order; identical for identical (cfg, table, class_ids)

    Raises:
        ConfigurationError: On invalid parameters or infeasible packing
    """
    cfg.validate()
    class_ids = list(table.class_ids if class_ids is None else class_ids)
    if not class_ids and cfg.actions_per_video > 0:
        raise ConfigurationError('no classes to plant', key='class_ids')
    unknown = set(class_ids) - set(table.class_ids)
    if unknown:
        raise ConfigurationError(f'classes {sorted(unknown)} not in table', key='class_ids')
    projection = FeatureProjection(cfg.projection_seed, table.dim, cfg.d_v, cfg.d_f)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        videos = list(pool.map(
            lambda i: _generate_video(i, cfg, table, projection, class_ids),
            range(cfg.n_videos)
        ))
    logger.info('generated %d synthetic videos (T=%d, snr=%s)', len(videos), cfg.T, cfg.snr)
    return videos


def class_separability(videos: Sequence[VideoFeatures], table: ClassEmbeddingTable,
                       projection: FeatureProjection) -> float:
    """
    Nearest-prototype accuracy of mean within-action frame features.

    Returns:
        Fraction of actions whose mean frame feature is closest to the frame
        prototype of the annotated class (1.0 when there are no actions)
    """
    prototypes = projection.frame_prototypes(table)
    correct = 0
    total = 0
    for video in videos:
        for ann in video.annotations:
            lo = int(ann.start) - 1
            hi = int(ann.end)
            centroid = video.frame[lo:hi].mean(axis=0)
            distances = np.linalg.norm(prototypes - centroid, axis=1)
            predicted = table.class_ids[int(np.argmin(distances))]
            correct += int(predicted == ann.class_id)
            total += 1
    return correct / total if total else 1.0
