"""The network: projections, modality-mixer pyramid and detection heads."""

from .config import ModelConfig
from .params import ModelParams, init_params, parameter_shapes, to_storage
from .attention import AttentionResult, multi_head_attention, self_attend, cross_attend
from .mixer import MixerOutput, mixer_level, feed_forward
from .encoder import (
    PyramidFeatures,
    project_inputs,
    positional_encoding,
    downsample,
    encode
)
from .heads import classify, regress, classify_features, text_keys
from .network import ForwardOutput, forward

__all__ = [
    'ModelConfig',
    'ModelParams',
    'init_params',
    'parameter_shapes',
    'to_storage',
    'AttentionResult',
    'multi_head_attention',
    'self_attend',
    'cross_attend',
    'MixerOutput',
    'mixer_level',
    'feed_forward',
    'PyramidFeatures',
    'project_inputs',
    'positional_encoding',
    'downsample',
    'encode',
    'classify',
    'regress',
    'classify_features',
    'text_keys',
    'ForwardOutput',
    'forward'
]
