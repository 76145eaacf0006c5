"""
Open-vocabulary prediction over whole videos and datasets.

The encoder always attends over the full inference vocabulary; the selection
(base, novel or all) only restricts which classes are scored, so a
novel-only run yields exactly the novel columns of the all-classes run.
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from config.runtime_settings import DEFAULT_THREADS
from config.settings import (
    CLASS_AWARE_NMS,
    MAX_DETECTIONS,
    NMS_THRESH,
    PRE_NMS_TOPK,
    SCORE_THRESH,
)
from ..core.exceptions import ConfigurationError, DataError, FormatError
from ..core.validators import ConfigValidator
from ..datasets.types import VideoFeatures
from ..datasets.windowing import pad_or_window
from ..model.config import ModelConfig
from ..model.network import forward
from ..model.params import ModelParams
from ..textbank.embeddings import ClassEmbeddingTable, select_split
from .decode import decode
from .detection import Detection, ranking_key
from .nms import nms

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
Predictions = Dict[str, List[Detection]]


@dataclass(frozen=True)
class InferenceConfig:
    """
    Decoding and suppression settings.

    Attributes:
        selection: Classes scored at inference (base | novel | all)
    """
    score_thresh: float = SCORE_THRESH
    pre_nms_topk: int = PRE_NMS_TOPK
    nms_thresh: float = NMS_THRESH
    class_aware: bool = CLASS_AWARE_NMS
    max_detections: int = MAX_DETECTIONS
    selection: str = 'all'

    def __post_init__(self):
        is_valid, error = ConfigValidator.validate_inference(self)
        if not is_valid:
            raise ConfigurationError(error)

    def to_dict(self) -> dict:
        return asdict(self)


def inference_tables(table: ClassEmbeddingTable, vocab,
                     selection: str) -> Tuple[ClassEmbeddingTable, ClassEmbeddingTable]:
    """(encoder context, scored classes) for a split selection."""
    if selection == 'all':
        return table, table
    scored, _ = select_split(table, vocab, selection)
    return table, scored


def predict_video(video: VideoFeatures, table: ClassEmbeddingTable, params: ModelParams,
                  model_cfg: ModelConfig, cfg: InferenceConfig,
                  classify_table: Optional[ClassEmbeddingTable] = None) -> List[Detection]:
    """
    Detect actions in one untrimmed video.

    Long videos are windowed; window detections are shifted to video
    coordinates, capped at pre_nms_topk for the whole video and merged by
    one NMS pass.

    Args:
        video: Source video
        table: Encoder context (full inference vocabulary)
        params: Trained parameters (read only)
        model_cfg: Model configuration
        cfg: Inference settings
        classify_table: Scored classes (default: table)

    Returns:
        At most cfg.max_detections detections, score descending
    """
    scored = table if classify_table is None else classify_table
    merged = []
    for window in pad_or_window(video, model_cfg.max_seq_len):
        out = forward(window, table, params, model_cfg, classify_table=scored)
        local = decode(out.logits, out.offsets, cfg.score_thresh, cfg.pre_nms_topk,
                       masks=out.masks, T=float(window.valid_length),
                       class_ids=scored.class_ids)
        shift = window.offset - video.offset
        merged.extend(d.shifted(shift) if shift else d for d in local)
    merged = sorted(merged, key=ranking_key)[:cfg.pre_nms_topk]
    kept = nms(merged, cfg.nms_thresh, cfg.class_aware)
    return kept[:cfg.max_detections]


def predict_dataset(videos: Sequence[VideoFeatures], table: ClassEmbeddingTable,
                    params: ModelParams, model_cfg: ModelConfig, cfg: InferenceConfig,
                    classify_table: Optional[ClassEmbeddingTable] = None,
                    threads: int = DEFAULT_THREADS) -> Predictions:
    """Predict every video concurrently; the result keeps input order."""
    def run(video):
        return predict_video(video, table, params, model_cfg, cfg, classify_table)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(run, videos))
    predictions = {v.video_id: dets for v, dets in zip(videos, results)}
    logger.info('predicted %d detections over %d videos',
                sum(len(d) for d in results), len(videos))
    return predictions


def write_predictions(predictions: Predictions, path: PathLike) -> Path:
    """JSON array of {video_id, detections: [{start, end, class_id, score}]}."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = [
        {'video_id': video_id, 'detections': [d.to_dict() for d in dets]}
        for video_id, dets in predictions.items()
    ]
    path.write_text(json.dumps(payload, indent=1) + '\n', encoding='utf-8')
    return path


def read_predictions(path: PathLike) -> Predictions:
    """
    Raises:
        FormatError: On malformed JSON or entries
    """
    try:
        payload = json.loads(Path(path).read_text(encoding='utf-8'))
    except OSError as e:
        raise FormatError(str(path), f'cannot read file ({e.strerror})')
    except ValueError as e:
        raise FormatError(str(path), f'invalid JSON ({e})')
    if not isinstance(payload, list):
        raise FormatError(str(path), 'expected a JSON array of videos')
    predictions: Predictions = {}
    for index, entry in enumerate(payload):
        try:
            video_id = str(entry['video_id'])
            dets = [Detection(float(d['start']), float(d['end']),
                              int(d['class_id']), float(d['score']))
                    for d in entry['detections']]
        except (KeyError, TypeError, ValueError, DataError) as e:
            raise FormatError(str(path), f'entry {index}: {e}')
        if video_id in predictions:
            raise FormatError(str(path), f'duplicate video {video_id}')
        predictions[video_id] = dets
    return predictions
