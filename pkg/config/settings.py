"""
Application-wide configuration settings.
All defaults are immutable; presets and CLI flags build on top of them.
"""

import math
from typing import Final, Tuple

# Tensor Core
LAYER_NORM_EPS: Final[float] = 1e-5
GRAD_CHECK_STEP: Final[float] = 1e-5
GRAD_CHECK_TOLERANCE: Final[float] = 1e-4

# Text Bank
EMBEDDING_DIM: Final[int] = 512  # CLIP ViT-B/32 text width
DESCRIPTIONS_PER_CLASS: Final[int] = 10
NORMALIZE_DESCRIPTIONS: Final[bool] = False
SYNTHETIC_DESCRIPTION_NOISE: Final[float] = 0.1

# Datasets
SNIPPET_DIM: Final[int] = 32
FRAME_DIM: Final[int] = 32
WINDOW_OVERLAP: Final[float] = 0.25
SYNTH_SMOOTHING_WINDOW: Final[int] = 3
SYNTH_MIN_ACTION_LEN: Final[int] = 4
SYNTH_MAX_ACTION_LEN: Final[int] = 24
SYNTH_SNR: Final[float] = 8.0

# Model
MODEL_DIM: Final[int] = 32
NUM_HEADS: Final[int] = 4
PYRAMID_LEVELS: Final[int] = 4
FFN_MULT: Final[int] = 4
HEAD_LAYERS: Final[int] = 2
HEAD_KERNEL: Final[int] = 3
DOWNSAMPLE_KERNEL: Final[int] = 3
TEMPERATURE_INIT: Final[float] = 10.0
PRIOR_PROB: Final[float] = 0.01
MAX_SEQ_LEN: Final[int] = 128

# Losses
FOCAL_ALPHA: Final[float] = 0.25
FOCAL_GAMMA: Final[float] = 2.0
REG_LOSS_WEIGHT: Final[float] = 1.0
CENTER_RATIO: Final[float] = 0.5
# Maximum-offset bounds (lo, hi] per pyramid level, in feature-grid cells
REGRESSION_RANGES: Final[Tuple[Tuple[float, float], ...]] = (
    (0.0, 4.0), (4.0, 8.0), (8.0, 16.0), (16.0, 32.0),
    (32.0, 64.0), (64.0, math.inf),
)

# Optimizer
ADAM_BETA1: Final[float] = 0.9
ADAM_BETA2: Final[float] = 0.999
ADAM_EPS: Final[float] = 1e-8
WEIGHT_DECAY: Final[float] = 1e-4
GRAD_CLIP: Final[float] = 1.0
MIN_LR_RATIO: Final[float] = 0.0

# Training
LEARNING_RATE: Final[float] = 1e-3
EPOCHS: Final[int] = 40
WARMUP_EPOCHS: Final[int] = 5
BATCH_SIZE: Final[int] = 4
SEED: Final[int] = 0

# Inference
SCORE_THRESH: Final[float] = 0.01
PRE_NMS_TOPK: Final[int] = 200
NMS_THRESH: Final[float] = 0.5
CLASS_AWARE_NMS: Final[bool] = True
MAX_DETECTIONS: Final[int] = 200

# Evaluation (tIoU grids)
TIOU_GRID_THUMOS: Final[Tuple[float, ...]] = (0.3, 0.4, 0.5, 0.6, 0.7)
TIOU_GRID_ANET: Final[Tuple[float, ...]] = tuple(
    round(0.5 + 0.05 * i, 2) for i in range(10)
)
TIOU_GRID_DEFAULT: Final[Tuple[float, ...]] = (0.5,)
