"""
Configuration validators.
Each check returns (is_valid, error_message); callers decide how to raise.
"""

import math
from typing import Optional, Sequence, Tuple

from .constants import FREEZE_MODES, SELECTIONS, SPLIT_BASE, SPLIT_SUPER, STAGES

Result = Tuple[bool, Optional[str]]


class ConfigValidator:
    """
    Validates configuration dataclasses before any work starts.
    Messages start with the offending key.
    """

    @staticmethod
    def validate_synth(cfg) -> Result:
        """
        Validate synthetic dataset parameters.

        Args:
            cfg: SynthConfig

        Returns:
            (is_valid, error_message)
        """
        if cfg.n_videos < 0:
            return False, 'n_videos: must be non-negative'
        if cfg.T < 1 or cfg.d_v < 1 or cfg.d_f < 1:
            return False, 'T: T, d_v and d_f must be positive'
        if cfg.min_len < 2:
            return False, 'min_len: must be at least 2'
        if cfg.max_len < cfg.min_len:
            return False, 'max_len: must be >= min_len'
        if not cfg.snr > 0:
            return False, 'snr: must be positive'
        if cfg.actions_per_video < 0:
            return False, 'actions_per_video: must be non-negative'
        needed = cfg.actions_per_video * cfg.max_len + max(0, cfg.actions_per_video - 1)
        if needed > cfg.T:
            return False, (
                f'actions_per_video: {cfg.actions_per_video} actions of up to '
                f'{cfg.max_len} steps (plus gaps) need {needed} > T={cfg.T} timesteps'
            )
        return True, None

    @staticmethod
    def validate_model(cfg) -> Result:
        """
        Validate model dimensions.

        Args:
            cfg: ModelConfig

        Returns:
            (is_valid, error_message)
        """
        for key in ('d_v', 'd_f', 'dim', 'dim_hat', 'heads', 'levels', 'text_dim',
                    'ffn_mult', 'max_seq_len'):
            if getattr(cfg, key) < 1:
                return False, f'{key}: must be a positive integer'
        if cfg.head_layers < 0:
            return False, 'head_layers: must be non-negative'
        if cfg.dim % cfg.heads != 0:
            return False, f'dim: D={cfg.dim} is not divisible by H={cfg.heads}'
        if cfg.dim_hat != cfg.dim:
            return False, (
                f'dim_hat: D_hat={cfg.dim_hat} must equal D={cfg.dim} '
                'so frame and snippet streams can be summed'
            )
        if not cfg.temperature > 0:
            return False, 'temperature: must be positive'
        if cfg.head_kernel % 2 == 0:
            return False, 'head_kernel: must be odd'
        if cfg.max_seq_len < 2 ** (cfg.levels - 1):
            return False, (
                f'max_seq_len: {cfg.max_seq_len} < 2^(M-1) = {2 ** (cfg.levels - 1)}; '
                'the pyramid would vanish'
            )
        return True, None

    @staticmethod
    def validate_train(cfg) -> Result:
        """
        Validate a training configuration.

        Args:
            cfg: TrainConfig

        Returns:
            (is_valid, error_message)
        """
        if cfg.stage not in STAGES:
            return False, f'stage: expected one of {STAGES}'
        min_epochs = 1 if cfg.stage == 'one' else 0
        if cfg.epochs < min_epochs:
            return False, f'epochs: must be at least {min_epochs}'
        if not cfg.lr >= 0 or math.isinf(cfg.lr):
            return False, 'lr: must be a finite non-negative number'
        if cfg.warmup_epochs < 0 or (cfg.epochs > 0 and cfg.warmup_epochs >= cfg.epochs):
            return False, 'warmup_epochs: must satisfy 0 <= warmup_epochs < epochs'
        if cfg.batch_size < 1:
            return False, 'batch_size: must be positive'
        if cfg.seed < 0:
            return False, 'seed: must be non-negative'
        if cfg.loss_weight < 0:
            return False, 'loss_weight: must be non-negative'
        if cfg.freeze not in FREEZE_MODES:
            return False, f'freeze: expected one of {FREEZE_MODES}'
        if not cfg.grad_clip > 0:
            return False, 'grad_clip: must be positive'
        if cfg.active_vocab not in (SPLIT_SUPER, SPLIT_BASE):
            return False, 'active_vocab: expected super or base'
        if cfg.weight_decay < 0:
            return False, 'weight_decay: must be non-negative'
        if not 0.0 <= cfg.min_lr_ratio <= 1.0:
            return False, 'min_lr_ratio: must lie in [0, 1]'
        if not 0.0 < cfg.center_ratio <= 1.0:
            return False, 'center_ratio: must lie in (0, 1]'
        if not 0.0 < cfg.focal_alpha <= 1.0:
            return False, 'focal_alpha: must lie in (0, 1]'
        if cfg.focal_gamma < 0:
            return False, 'focal_gamma: must be non-negative'
        return True, None

    @staticmethod
    def validate_inference(cfg) -> Result:
        """
        Validate decoding and NMS settings.

        Args:
            cfg: InferenceConfig

        Returns:
            (is_valid, error_message)
        """
        if not 0.0 < cfg.score_thresh < 1.0:
            return False, 'score_thresh: must lie in (0, 1)'
        if cfg.pre_nms_topk < 1:
            return False, 'pre_nms_topk: must be at least 1'
        if not 0.0 < cfg.nms_thresh <= 1.0:
            return False, 'nms_thresh: must lie in (0, 1]'
        if cfg.max_detections < 1:
            return False, 'max_detections: must be at least 1'
        if cfg.selection not in SELECTIONS:
            return False, f'selection: expected one of {SELECTIONS}'
        return True, None

    @staticmethod
    def validate_tiou_grid(grid: Sequence[float]) -> Result:
        """
        A tIoU grid must be non-empty and strictly increasing within (0, 1].

        Returns:
            (is_valid, error_message)
        """
        if not grid:
            return False, 'tiou_grid: must not be empty'
        for lo, hi in zip(grid, grid[1:]):
            if not lo < hi:
                return False, 'tiou_grid: must be strictly increasing'
        if not (0.0 < grid[0] and grid[-1] <= 1.0):
            return False, 'tiou_grid: thresholds must lie in (0, 1]'
        return True, None
