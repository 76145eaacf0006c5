"""
Format and vocabulary constants.
All values are immutable and shared by every reader and writer.
"""

from typing import Final, Tuple

# Prompt template handed to the language model for class descriptions
PROMPT_TEMPLATE: Final[str] = (
    'How can you recognize a video of a person performing the {classname} action?'
)

# Vocabulary splits
SPLIT_SUPER: Final[str] = 'super'
SPLIT_BASE: Final[str] = 'base'
SPLIT_NOVEL: Final[str] = 'novel'
SPLITS: Final[Tuple[str, ...]] = (SPLIT_SUPER, SPLIT_BASE, SPLIT_NOVEL)
SELECTIONS: Final[Tuple[str, ...]] = (SPLIT_BASE, SPLIT_NOVEL, 'all')

# Dataset roles
DATASET_ROLES: Final[Tuple[str, ...]] = ('super', 'base', 'test')

# Binary formats (little-endian, u32 header fields)
FORMAT_VERSION: Final[int] = 1
DESCRIPTION_MAGIC: Final[bytes] = b'OVTB'
TABLE_MAGIC: Final[bytes] = b'OVZL'
FEATURE_MAGIC: Final[bytes] = b'OVFT'
CHECKPOINT_MAGIC: Final[bytes] = b'OVCK'

# Model parameter groups
ENCODER_PREFIX: Final[str] = 'enc.'
DECODER_PREFIX: Final[str] = 'dec.'
NO_DECAY_SUFFIXES: Final[Tuple[str, ...]] = ('.bias', '.gain', '.tau', '.b1', '.b2')

# Freeze modes and training stages
FREEZE_MODES: Final[Tuple[str, ...]] = ('none', 'enc', 'dec')
STAGES: Final[Tuple[str, ...]] = ('one', 'two')
