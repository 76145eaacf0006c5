"""
Input projections and the multi-scale encoder.

Level 1 runs the mixer at full resolution. Each further level halves the
length of both streams with a stride-2 depthwise-separable convolution and
runs its own mixer; the snippet stream continues from Z, the frame stream
from the guided features Z_F'.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..core.exceptions import ConfigurationError
from ..tensor import Tensor, as_tensor, ops
from .attention import mask_rows
from .config import ModelConfig
from .mixer import mixer_level
from .params import ModelParams

logger = logging.getLogger(__name__)


@dataclass
class PyramidFeatures:
    """
    Enriched features per level.

    Attributes:
        levels: M tensors, level m is T_m x D
        masks: Boolean validity per level
    """
    levels: List[Tensor]
    masks: List[np.ndarray]

    @property
    def lengths(self) -> List[int]:
        return [z.shape[0] for z in self.levels]

    @property
    def strides(self) -> List[int]:
        return [2 ** m for m in range(len(self.levels))]


def _projection(x: Tensor, params: ModelParams, stream: str, mask: np.ndarray) -> Tensor:
    """Two 1x1 conv + ReLU layers."""
    out = x
    for i in range(2):
        p = f'enc.proj_{stream}.{i}'
        out = ops.conv1d(out, params[f'{p}.weight'])
        out = ops.relu(ops.add(out, params[f'{p}.bias']))
        out = mask_rows(out, mask)
    return out


def project_inputs(snippet, frame, params: ModelParams, cfg: ModelConfig,
                   mask: Optional[np.ndarray] = None) -> Tuple[Tensor, Tensor]:
    """
    Map X_V and X_F to the model width.

    Args:
        snippet: X_V, T x d_v (array or Tensor)
        frame: X_F, T x d_f (array or Tensor)
        params: Model parameters
        cfg: Model configuration
        mask: Boolean validity (T,); padded rows stay zero

    Returns:
        (Z_V, Z_F), both T x D

    Raises:
        ConfigurationError: If feature widths do not match the configuration
    """
    snippet, frame = as_tensor(snippet), as_tensor(frame)
    if snippet.data.ndim != 2 or snippet.shape[1] != cfg.d_v:
        raise ConfigurationError(
            f'snippet features have shape {snippet.shape}, model expects width {cfg.d_v}',
            key='d_v'
        )
    if frame.data.ndim != 2 or frame.shape[1] != cfg.d_f:
        raise ConfigurationError(
            f'frame features have shape {frame.shape}, model expects width {cfg.d_f}',
            key='d_f'
        )
    if mask is None:
        mask = np.ones(snippet.shape[0], dtype=bool)
    return (_projection(snippet, params, 'v', mask),
            _projection(frame, params, 'f', mask))


def positional_encoding(T: int, dim: int) -> np.ndarray:
    """Fixed sinusoidal encodings, T x dim (sin on even, cos on odd channels)."""
    position = np.arange(T, dtype=np.float64)[:, None]
    rates = np.exp(-np.log(10000.0) * (np.arange(0, dim, 2, dtype=np.float64) / dim))
    table = np.zeros((T, dim))
    table[:, 0::2] = np.sin(position * rates)
    table[:, 1::2] = np.cos(position * rates[:dim // 2])
    return table


def downsample(x: Tensor, params: ModelParams, level: int, stream: str,
               mask: np.ndarray) -> Tuple[Tensor, np.ndarray]:
    """
    Stride-2 depthwise conv, pointwise 1x1 conv and bias.

    Returns:
        (features of length ceil(T/2), mask sampled at the even positions)
    """
    p = f'enc.level{level}.down_{stream}'
    out = ops.depthwise_conv1d(x, params[f'{p}.depthwise'], stride=2)
    out = ops.add(ops.conv1d(out, params[f'{p}.pointwise']), params[f'{p}.bias'])
    new_mask = np.asarray(mask, dtype=bool)[::2]
    return mask_rows(out, new_mask), new_mask


def encode(z_v: Tensor, z_f: Tensor, z_l, params: ModelParams, cfg: ModelConfig,
           mask: Optional[np.ndarray] = None) -> PyramidFeatures:
    """
    Build the feature pyramid.

    Args:
        z_v: Projected snippet stream T x D
        z_f: Projected frame stream T x D
        z_l: Class embeddings the mixers attend over (A x s)
        params: Model parameters
        cfg: Model configuration
        mask: Boolean validity (T,)

    Returns:
        PyramidFeatures with lengths T, ceil(T/2), ...

    Raises:
        ConfigurationError: If T < 2^(M-1)
    """
    T = z_v.shape[0]
    if T < 2 ** (cfg.levels - 1):
        raise ConfigurationError(
            f'sequence length {T} is shorter than 2^(M-1) = {2 ** (cfg.levels - 1)}',
            key='levels'
        )
    mask = np.ones(T, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    pe = positional_encoding(T, cfg.dim)
    snippet = mask_rows(ops.add(z_v, pe), mask)
    frame = mask_rows(ops.add(z_f, pe), mask)
    levels, masks = [], []
    level_mask = mask
    for m in range(1, cfg.levels + 1):
        if m > 1:
            snippet, next_mask = downsample(snippet, params, m, 'v', level_mask)
            frame, _ = downsample(frame, params, m, 'f', level_mask)
            level_mask = next_mask
        out = mixer_level(snippet, frame, z_l, params, m, cfg, level_mask)
        levels.append(out.z)
        masks.append(level_mask)
        snippet, frame = out.z, out.guided
    return PyramidFeatures(levels, masks)
