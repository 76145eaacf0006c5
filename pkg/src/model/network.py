"""
Full network: f = decoder(encoder(x)).
"""

from dataclasses import dataclass
from typing import List

import numpy as np

from ..tensor import Tensor
from .config import ModelConfig
from .encoder import PyramidFeatures, encode, project_inputs
from .heads import embedding_matrix, classify, regress
from .params import ModelParams


@dataclass
class ForwardOutput:
    """Per-level head outputs and validity masks."""
    logits: List[Tensor]
    offsets: List[Tensor]
    masks: List[np.ndarray]
    pyramid: PyramidFeatures


def forward(video, table, params: ModelParams, cfg: ModelConfig,
            classify_table=None) -> ForwardOutput:
    """
    Run the network on one (windowed) video.

    Args:
        video: VideoFeatures (snippet, frame, mask)
        table: Class embeddings the encoder attends over
        params: Model parameters
        cfg: Model configuration
        classify_table: Embeddings scored by the classification head
            (default: table)

    Returns:
        ForwardOutput; level m gives logits T_m x A and offsets T_m x 2
    """
    context = embedding_matrix(table)
    scored = context if classify_table is None else embedding_matrix(classify_table)
    mask = getattr(video, 'mask', None)
    z_v, z_f = project_inputs(video.snippet, video.frame, params, cfg, mask)
    pyramid = encode(z_v, z_f, context, params, cfg, mask)
    return ForwardOutput(
        classify(pyramid, scored, params, cfg),
        regress(pyramid, params, cfg),
        pyramid.masks,
        pyramid
    )
