"""Optimizer, schedule, checkpoints and the two-stage training loop."""

from .config import TrainConfig, Preset, PRESETS, get_preset
from .schedule import lr_at
from .optimizer import AdamWState, clip_gradients, collect_gradients, global_norm, optimizer_step
from .checkpoint import Checkpoint, save_checkpoint, load_checkpoint
from .report import EpochLoss, TrainReport, write_train_log, read_train_log, write_train_summary
from .trainer import (
    Trainer,
    make_windows,
    check_vocabulary,
    frozen_names,
    window_loss,
    train_stage1,
    finetune_stage2
)

__all__ = [
    'TrainConfig',
    'Preset',
    'PRESETS',
    'get_preset',
    'lr_at',
    'AdamWState',
    'clip_gradients',
    'collect_gradients',
    'global_norm',
    'optimizer_step',
    'Checkpoint',
    'save_checkpoint',
    'load_checkpoint',
    'EpochLoss',
    'TrainReport',
    'write_train_log',
    'read_train_log',
    'write_train_summary',
    'Trainer',
    'make_windows',
    'check_vocabulary',
    'frozen_names',
    'window_loss',
    'train_stage1',
    'finetune_stage2'
]
