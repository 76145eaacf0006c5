"""Video feature datasets: containers, blobs, manifests, windowing, synthesis."""

from .types import ActionAnnotation, VideoFeatures, DatasetManifest
from .feature_io import write_features, read_features
from .manifest import load_manifest, load_dataset, write_dataset, manifest_vocabulary
from .windowing import window_offsets, clip_annotation, pad_or_window
from .synthetic import SynthConfig, FeatureProjection, synth_generate, class_separability

__all__ = [
    'ActionAnnotation',
    'VideoFeatures',
    'DatasetManifest',
    'write_features',
    'read_features',
    'load_manifest',
    'load_dataset',
    'write_dataset',
    'manifest_vocabulary',
    'window_offsets',
    'clip_annotation',
    'pad_or_window',
    'SynthConfig',
    'FeatureProjection',
    'synth_generate',
    'class_separability'
]
