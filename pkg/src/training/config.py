"""
Training configuration and named presets.
"""

from dataclasses import asdict, dataclass, field, fields, replace
from typing import Dict

from config.settings import (
    BATCH_SIZE,
    CENTER_RATIO,
    EPOCHS,
    FOCAL_ALPHA,
    FOCAL_GAMMA,
    GRAD_CLIP,
    LEARNING_RATE,
    MIN_LR_RATIO,
    REG_LOSS_WEIGHT,
    SEED,
    WARMUP_EPOCHS,
    WEIGHT_DECAY,
)
from ..core.constants import SPLIT_BASE, SPLIT_SUPER
from ..core.exceptions import ConfigurationError, UsageError
from ..core.validators import ConfigValidator


@dataclass(frozen=True)
class TrainConfig:
    """
    One training stage.

    Attributes:
        stage: "one" (V_super) or "two" (finetune on V_base)
        epochs: Passes over the data (stage two may use 0)
        lr: Peak learning rate
        warmup_epochs: Linear warmup length, < epochs
        batch_size: Windows per optimizer step
        seed: Shuffle and init seed
        loss_weight: lambda in L_cls + lambda * L_reg
        freeze: none | enc | dec
        grad_clip: Global gradient-norm bound
        active_vocab: Vocabulary the stage trains on (super | base)
    """
    stage: str = 'one'
    epochs: int = EPOCHS
    lr: float = LEARNING_RATE
    warmup_epochs: int = WARMUP_EPOCHS
    batch_size: int = BATCH_SIZE
    seed: int = SEED
    loss_weight: float = REG_LOSS_WEIGHT
    freeze: str = 'none'
    grad_clip: float = GRAD_CLIP
    active_vocab: str = SPLIT_SUPER
    weight_decay: float = WEIGHT_DECAY
    min_lr_ratio: float = MIN_LR_RATIO
    center_ratio: float = CENTER_RATIO
    focal_alpha: float = FOCAL_ALPHA
    focal_gamma: float = FOCAL_GAMMA

    def __post_init__(self):
        is_valid, error = ConfigValidator.validate_train(self)
        if not is_valid:
            raise ConfigurationError(error)

    def to_dict(self) -> dict:
        return asdict(self)

    def with_overrides(self, **overrides) -> 'TrainConfig':
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigurationError(f'unknown training keys {sorted(unknown)}')
        return replace(self, **overrides)


@dataclass(frozen=True)
class Preset:
    """Key overrides per configuration section."""
    name: str
    train: Dict[str, object] = field(default_factory=dict)
    model: Dict[str, object] = field(default_factory=dict)
    inference: Dict[str, object] = field(default_factory=dict)


PRESETS: Dict[str, Preset] = {
    'stage1': Preset(
        'stage1',
        train={'stage': 'one', 'lr': 1e-3, 'epochs': 40, 'active_vocab': SPLIT_SUPER},
        model={'max_seq_len': 512},
        inference={'nms_thresh': 0.75},
    ),
    'thumos-ft': Preset(
        'thumos-ft',
        train={'stage': 'two', 'lr': 1e-4, 'epochs': 13, 'active_vocab': SPLIT_BASE},
        model={'max_seq_len': 2304},
        inference={'nms_thresh': 0.5},
    ),
    'anet-ft': Preset(
        'anet-ft',
        train={'stage': 'two', 'lr': 1e-3, 'epochs': 15, 'active_vocab': SPLIT_BASE},
        model={'max_seq_len': 192},
        inference={'nms_thresh': 0.7},
    ),
    # Desk scale: synthetic data, small widths, short schedules
    'acceptance': Preset(
        'acceptance',
        train={'lr': 2e-3, 'epochs': 12, 'warmup_epochs': 1, 'batch_size': 4},
        model={'max_seq_len': 128, 'dim': 32, 'dim_hat': 32, 'heads': 4,
               'levels': 4, 'text_dim': 64, 'd_v': 32, 'd_f': 32},
        inference={'nms_thresh': 0.5},
    ),
}


def get_preset(name: str) -> Preset:
    """
    Raises:
        UsageError: If the preset does not exist
    """
    try:
        return PRESETS[name]
    except KeyError:
        raise UsageError(f'unknown preset {name!r}; choose from {sorted(PRESETS)}')
