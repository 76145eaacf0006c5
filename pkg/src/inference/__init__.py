"""Decoding, temporal NMS and open-vocabulary prediction."""

from .detection import Detection, ranking_key
from .decode import decode
from .nms import temporal_iou, segment_ious, nms
from .predictor import (
    InferenceConfig,
    inference_tables,
    predict_video,
    predict_dataset,
    write_predictions,
    read_predictions
)

__all__ = [
    'Detection',
    'ranking_key',
    'decode',
    'temporal_iou',
    'segment_ious',
    'nms',
    'InferenceConfig',
    'inference_tables',
    'predict_video',
    'predict_dataset',
    'write_predictions',
    'read_predictions'
]
