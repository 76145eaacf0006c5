"""
The modality mixer: one encoder level.

    Z_V' = Z_V + SA(LN(Z_V))
    Z_F' = Z_F + CA(LN(Z_F), Z_L)
    U    = Z_F' + Z_V'            (U = Z_V' in late-fusion mode)
    Z    = U + FFN(LN(U))
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from config.settings import LAYER_NORM_EPS
from ..core.exceptions import DimensionError
from ..tensor import Tensor, ops
from .attention import mask_rows, cross_attend, self_attend
from .config import ModelConfig
from .params import ModelParams


@dataclass
class MixerOutput:
    """
    Attributes:
        z: Enriched features Z (T_m x D)
        guided: Multimodal guided features Z_F' (the frame input in late-fusion mode)
        snippet: Self-attended snippet features Z_V'
    """
    z: Tensor
    guided: Tensor
    snippet: Tensor


def feed_forward(u: Tensor, params: ModelParams, level: int) -> Tensor:
    """Two-layer ReLU MLP applied per timestep to LN(u)."""
    p = f'enc.level{level}'
    normed = ops.layer_norm(u, params[f'{p}.ffn_norm.gain'], params[f'{p}.ffn_norm.bias'],
                            LAYER_NORM_EPS)
    hidden = ops.relu(ops.add(ops.matmul(normed, params[f'{p}.ffn.w1']), params[f'{p}.ffn.b1']))
    return ops.add(ops.matmul(hidden, params[f'{p}.ffn.w2']), params[f'{p}.ffn.b2'])


def mixer_level(z_v: Tensor, z_f: Tensor, z_l, params: ModelParams, level: int,
                cfg: ModelConfig, mask: Optional[np.ndarray] = None) -> MixerOutput:
    """
    Fuse the snippet stream with text-guided frame features.

    Args:
        z_v: Snippet stream T_m x D
        z_f: Frame stream T_m x D
        z_l: Class embeddings A x s (unused in late-fusion mode)
        params: Model parameters
        level: Pyramid level m (1-based)
        cfg: Model configuration
        mask: Boolean validity (T_m,)

    Returns:
        MixerOutput; z is zero on padded positions

    Raises:
        DimensionError: If the streams differ in length
    """
    if z_v.shape != z_f.shape:
        raise DimensionError('mixer_level', z_v.shape, z_f.shape)
    snippet = self_attend(z_v, params, level, cfg, mask).output
    if cfg.late_fusion_only:
        guided = z_f
        fused = snippet
    else:
        guided = cross_attend(z_f, z_l, params, level, cfg, mask).output
        fused = ops.add(guided, snippet)
    z = mask_rows(ops.add(fused, feed_forward(fused, params, level)), mask)
    return MixerOutput(z, guided, snippet)
