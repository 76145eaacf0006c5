"""
Decoder heads shared across pyramid levels.

The open-vocabulary classification head scores each timestep against the
text embeddings of whatever classes are active:
logit(t, a) = tau * cos(feat_t, W_L z_a) + b. The regression head predicts
positive distances to the action start and end in level-stride units.
"""

from typing import List, Optional

import numpy as np

from ..tensor import Tensor, as_tensor, ops
from .attention import mask_rows
from .config import ModelConfig
from .encoder import PyramidFeatures
from .params import ModelParams


def _conv_stack(x: Tensor, params: ModelParams, head: str, cfg: ModelConfig,
                mask: np.ndarray) -> Tensor:
    out = x
    for i in range(cfg.head_layers):
        p = f'dec.{head}.conv{i}'
        out = ops.add(ops.conv1d(out, params[f'{p}.weight']), params[f'{p}.bias'])
        out = mask_rows(ops.relu(out), mask)
    return out


def embedding_matrix(table) -> Tensor:
    """Accept a ClassEmbeddingTable, an array or a Tensor."""
    matrix = getattr(table, 'matrix', table)
    return as_tensor(matrix)


def text_keys(table, params: ModelParams) -> Tensor:
    """Unit-norm projected class embeddings W_L z_a, A x D."""
    return ops.normalize_rows(ops.matmul(embedding_matrix(table), params['dec.cls.text_proj']))


def classify(pyramid: PyramidFeatures, table, params: ModelParams,
             cfg: ModelConfig) -> List[Tensor]:
    """
    Per-level class logits.

    Args:
        pyramid: Encoder output
        table: Active class embeddings (A x s)
        params: Model parameters
        cfg: Model configuration

    Returns:
        One T_m x A logit tensor per level
    """
    logits = []
    for z, mask in zip(pyramid.levels, pyramid.masks):
        feat = _conv_stack(z, params, 'cls', cfg, mask)
        feat = ops.add(ops.conv1d(feat, params['dec.cls.out.weight']),
                       params['dec.cls.out.bias'])
        logits.append(classify_features(feat, table, params, mask))
    return logits


def regress(pyramid: PyramidFeatures, params: ModelParams,
            cfg: ModelConfig) -> List[Tensor]:
    """Per-level offsets (d_start, d_end), T_m x 2, strictly positive."""
    offsets = []
    for z, mask in zip(pyramid.levels, pyramid.masks):
        feat = _conv_stack(z, params, 'reg', cfg, mask)
        raw = ops.add(ops.conv1d(feat, params['dec.reg.out.weight']),
                      params['dec.reg.out.bias'])
        offsets.append(ops.softplus(raw))
    return offsets


def classify_features(features: Tensor, table, params: ModelParams,
                      mask: Optional[np.ndarray] = None) -> Tensor:
    """Cosine logits of head features (T x D) against a table; padded rows score b."""
    keys = ops.transpose(text_keys(table, params))
    feat = mask_rows(features, mask)
    cosine = ops.matmul(ops.normalize_rows(feat), keys)
    return ops.add(ops.mul(cosine, params['dec.cls.tau']), params['dec.cls.bias'])
