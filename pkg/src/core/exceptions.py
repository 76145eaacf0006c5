"""
Custom exceptions for the OVFormer toolkit.
Every error carries the exit code the command line reports for it.
"""

from typing import Iterable, Optional, Sequence


class OVFormerError(Exception):
    """Base exception for toolkit errors."""
    exit_code = 2


class UsageError(OVFormerError):
    """Raised when an operation is called outside its contract."""
    exit_code = 1

    def __init__(self, message: str, usage: Optional[str] = None):
        self.usage = usage
        super().__init__(message)


class ConfigurationError(OVFormerError):
    """Raised when a configuration value or key is invalid."""
    exit_code = 1

    def __init__(self, message: str, key: Optional[str] = None,
                 source: Optional[str] = None):
        self.key = key
        self.source = source
        where = ''
        if source:
            where += f'{source}: '
        if key:
            where += f'{key}: '
        super().__init__(f'{where}{message}')


class DimensionError(ConfigurationError):
    """Raised when tensor shapes are incompatible."""

    def __init__(self, op: str, shape_a: Sequence[int], shape_b: Sequence[int]):
        self.op = op
        self.shape_a = tuple(shape_a)
        self.shape_b = tuple(shape_b)
        super().__init__(
            f'{op}: incompatible shapes {self.shape_a} and {self.shape_b}'
        )


class DataError(OVFormerError):
    """Raised when input data violates an invariant."""
    exit_code = 2


class FormatError(DataError):
    """Raised when a file cannot be parsed."""

    def __init__(self, path: str, reason: str):
        self.path = str(path)
        self.reason = reason
        super().__init__(f'{self.path}: {reason}')


class CheckpointMismatchError(DataError):
    """Raised when a checkpoint does not fit the requested configuration."""

    def __init__(self, mismatches: Iterable[str]):
        self.mismatches = list(mismatches)
        super().__init__(
            'Checkpoint incompatible: ' + '; '.join(self.mismatches)
        )


class NumericError(OVFormerError):
    """Raised when a non-finite value appears during computation."""
    exit_code = 3

    def __init__(self, where: str, detail: str = 'non-finite values'):
        self.where = where
        super().__init__(f'{detail} in {where}')
