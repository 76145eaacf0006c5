"""
Deterministic randomness helpers.
Every random draw in the toolkit comes from a generator derived here, so that a
(seed, key path) pair always reproduces the same stream.
"""

import hashlib
from typing import Union

import numpy as np

Key = Union[int, str]


def name_key(name: str) -> int:
    """
    Stable 32-bit integer for a string key.

    Args:
        name: Any string (class name, stream label)

    Returns:
        Integer derived from the SHA-256 digest (independent of PYTHONHASHSEED)
    """
    digest = hashlib.sha256(name.encode('utf-8')).digest()
    return int.from_bytes(digest[:4], 'little')


def derive_rng(seed: int, *keys: Key) -> np.random.Generator:
    """
    Derive an independent generator from a seed and a key path.

    Args:
        seed: Base seed (non-negative)
        *keys: Integers or strings identifying the stream

    Returns:
        numpy Generator seeded through SeedSequence

    Raises:
        ValueError: If seed is negative
    """
    if seed < 0:
        raise ValueError('seed must be non-negative')
    entropy = [int(seed)]
    for key in keys:
        entropy.append(name_key(key) if isinstance(key, str) else int(key))
    return np.random.default_rng(np.random.SeedSequence(entropy))


def unit_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Draw a uniformly random direction of the given dimension."""
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)
