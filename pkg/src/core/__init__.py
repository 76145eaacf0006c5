"""Core constants, errors, seeding and binary codec."""

from .seeding import derive_rng, name_key, unit_vector
from .exceptions import (
    OVFormerError,
    UsageError,
    ConfigurationError,
    DimensionError,
    DataError,
    FormatError,
    CheckpointMismatchError,
    NumericError
)

__all__ = [
    'derive_rng',
    'name_key',
    'unit_vector',
    'OVFormerError',
    'UsageError',
    'ConfigurationError',
    'DimensionError',
    'DataError',
    'FormatError',
    'CheckpointMismatchError',
    'NumericError'
]
