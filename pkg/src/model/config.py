"""
Model dimensions.
"""

from dataclasses import asdict, dataclass, fields
from typing import Dict, List

from config.settings import (
    EMBEDDING_DIM,
    FFN_MULT,
    FRAME_DIM,
    HEAD_KERNEL,
    HEAD_LAYERS,
    MAX_SEQ_LEN,
    MODEL_DIM,
    NUM_HEADS,
    PYRAMID_LEVELS,
    SNIPPET_DIM,
    TEMPERATURE_INIT,
)
from ..core.exceptions import ConfigurationError
from ..core.validators import ConfigValidator

# Display symbols used in mismatch reports
SYMBOLS: Dict[str, str] = {
    'd_v': 'd_v',
    'd_f': 'd_f',
    'dim': 'D',
    'dim_hat': 'D_hat',
    'heads': 'H',
    'levels': 'M',
    'text_dim': 's',
    'ffn_mult': 'ffn_mult',
    'head_layers': 'head_layers',
    'head_kernel': 'head_kernel',
    'temperature': 'tau',
    'late_fusion_only': 'late_fusion_only',
    'max_seq_len': 'T',
}

# Fields that decide parameter shapes or wiring
STRUCTURAL_FIELDS = ('d_v', 'd_f', 'dim', 'dim_hat', 'heads', 'levels', 'text_dim',
                     'ffn_mult', 'head_layers', 'head_kernel', 'late_fusion_only')


@dataclass(frozen=True)
class ModelConfig:
    """
    All network dimensions.

    Attributes:
        d_v: Snippet feature width
        d_f: Frame feature width
        dim: Model width D
        dim_hat: Frame stream width after projection (must equal dim)
        heads: Attention heads H
        levels: Pyramid levels M
        text_dim: Class embedding width s
        ffn_mult: FFN expansion factor
        head_layers: Conv+ReLU layers per head before the output layer
        head_kernel: Head conv kernel size (odd)
        temperature: Initial similarity scale tau
        late_fusion_only: Skip cross-attention; text enters only at the head
        max_seq_len: Window length T used for training and inference
    """
    d_v: int = SNIPPET_DIM
    d_f: int = FRAME_DIM
    dim: int = MODEL_DIM
    dim_hat: int = MODEL_DIM
    heads: int = NUM_HEADS
    levels: int = PYRAMID_LEVELS
    text_dim: int = EMBEDDING_DIM
    ffn_mult: int = FFN_MULT
    head_layers: int = HEAD_LAYERS
    head_kernel: int = HEAD_KERNEL
    temperature: float = TEMPERATURE_INIT
    late_fusion_only: bool = False
    max_seq_len: int = MAX_SEQ_LEN

    def __post_init__(self):
        is_valid, error = ConfigValidator.validate_model(self)
        if not is_valid:
            raise ConfigurationError(error)

    @property
    def head_dim(self) -> int:
        """Per-head key width D_k."""
        return self.dim // self.heads

    def level_lengths(self, T: int) -> List[int]:
        """T_1 = T, T_{m+1} = ceil(T_m / 2)."""
        lengths = [T]
        for _ in range(1, self.levels):
            lengths.append(-(-lengths[-1] // 2))
        return lengths

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> 'ModelConfig':
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f'unknown model keys {sorted(unknown)}')
        return cls(**data)

    def mismatches(self, other: 'ModelConfig') -> List[str]:
        """Structural differences as "SYMBOL: expected X, found Y" strings."""
        out = []
        for name in STRUCTURAL_FIELDS:
            expected, found = getattr(self, name), getattr(other, name)
            if expected != found:
                out.append(f'{SYMBOLS[name]}: expected {expected}, found {found}')
        return out
