"""
Multi-head scaled dot-product attention and the two mixer attention blocks.

Self-attention relates snippet positions to each other; cross-attention lets
frame features (queries) attend over the class embeddings (keys and values).
Both are pre-norm residual blocks.
"""

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from config.settings import LAYER_NORM_EPS
from ..core.exceptions import UsageError
from ..tensor import Tensor, as_tensor, ops
from .config import ModelConfig
from .params import ModelParams


@dataclass
class AttentionResult:
    """Block output plus the per-head attention matrices (for inspection)."""
    output: Tensor
    weights: List[np.ndarray]


def multi_head_attention(queries: Tensor, context: Tensor, w_q: Tensor, w_k: Tensor,
                         w_v: Tensor, w_o: Tensor, heads: int,
                         key_mask: Optional[np.ndarray] = None) -> AttentionResult:
    """
    softmax(Q_h K_h^T / sqrt(D_k)) V_h per head, concatenated and projected by w_o.

    Args:
        queries: T_q x D
        context: T_k x C (keys and values are projected from it)
        w_q: D x D
        w_k: C x D
        w_v: C x D
        w_o: D x D
        heads: Number of heads H (D divisible by H)
        key_mask: Optional boolean (T_k,); False keys get zero attention

    Returns:
        AttentionResult with output T_q x D
    """
    q = ops.matmul(queries, w_q)
    k = ops.matmul(context, w_k)
    v = ops.matmul(context, w_v)
    dim = q.shape[1]
    if dim % heads != 0:
        raise UsageError(f'width {dim} not divisible by {heads} heads')
    head_dim = dim // heads
    scale = 1.0 / math.sqrt(head_dim)
    outputs = []
    weights = []
    for h in range(heads):
        lo, hi = h * head_dim, (h + 1) * head_dim
        q_h = ops.slice_cols(q, lo, hi)
        k_h = ops.slice_cols(k, lo, hi)
        v_h = ops.slice_cols(v, lo, hi)
        scores = ops.mul(ops.matmul(q_h, ops.transpose(k_h)), scale)
        attn = ops.softmax_rows(scores, key_mask)
        weights.append(attn.data)
        outputs.append(ops.matmul(attn, v_h))
    merged = outputs[0] if heads == 1 else ops.concat_cols(outputs)
    return AttentionResult(ops.matmul(merged, w_o), weights)


def mask_rows(x: Tensor, mask: Optional[np.ndarray]) -> Tensor:
    if mask is None:
        return x
    return ops.mul(x, np.asarray(mask, dtype=np.float64)[:, None])


def self_attend(z_v: Tensor, params: ModelParams, level: int, cfg: ModelConfig,
                mask: Optional[np.ndarray] = None) -> AttentionResult:
    """
    Z_V' = Z_V + SA(LN(Z_V)) with padded positions excluded as keys.

    Args:
        z_v: Snippet stream T_m x D
        params: Model parameters
        level: Pyramid level m (1-based)
        cfg: Model configuration
        mask: Boolean validity (T_m,)
    """
    p = f'enc.level{level}'
    normed = ops.layer_norm(z_v, params[f'{p}.sa_norm.gain'], params[f'{p}.sa_norm.bias'],
                            LAYER_NORM_EPS)
    attended = multi_head_attention(
        normed, normed,
        params[f'{p}.sa.w_q'], params[f'{p}.sa.w_k'],
        params[f'{p}.sa.w_v'], params[f'{p}.sa.w_o'],
        cfg.heads, key_mask=mask
    )
    out = mask_rows(ops.add(z_v, attended.output), mask)
    return AttentionResult(out, attended.weights)


def cross_attend(z_f: Tensor, z_l, params: ModelParams, level: int, cfg: ModelConfig,
                 mask: Optional[np.ndarray] = None) -> AttentionResult:
    """
    Multimodal guided features Z_F' = Z_F + CA(LN(Z_F), Z_L).

    Args:
        z_f: Frame stream T_m x D
        z_l: Class embeddings A x s (array or Tensor)
        params: Model parameters
        level: Pyramid level m (1-based)
        cfg: Model configuration
        mask: Boolean validity of the frame positions (T_m,)

    Raises:
        UsageError: If the class table is empty
    """
    z_l = as_tensor(z_l)
    if z_l.data.ndim != 2 or z_l.shape[0] == 0:
        raise UsageError('cross-attention needs at least one class embedding')
    p = f'enc.level{level}'
    normed = ops.layer_norm(z_f, params[f'{p}.ca_norm.gain'], params[f'{p}.ca_norm.bias'],
                            LAYER_NORM_EPS)
    attended = multi_head_attention(
        normed, z_l,
        params[f'{p}.ca.w_q'], params[f'{p}.ca.w_k'],
        params[f'{p}.ca.w_v'], params[f'{p}.ca.w_o'],
        cfg.heads
    )
    out = mask_rows(ops.add(z_f, attended.output), mask)
    return AttentionResult(out, attended.weights)
