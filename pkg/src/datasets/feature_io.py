"""
Feature blob format (OVFT).

Layout: "OVFT", u32 version, u32 T, u32 d_v, u32 d_f, then T x d_v float32
snippet features followed by T x d_f float32 frame features.
"""

from pathlib import Path
from typing import Tuple, Union

import numpy as np

from ..core.binary import BinaryReader, write_f32, write_header
from ..core.constants import FEATURE_MAGIC, FORMAT_VERSION

PathLike = Union[str, Path]


def write_features(snippet: np.ndarray, frame: np.ndarray, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'wb') as f:
        write_header(f, FEATURE_MAGIC, FORMAT_VERSION,
                     snippet.shape[0], snippet.shape[1], frame.shape[1])
        write_f32(f, snippet)
        write_f32(f, frame)
    return path


def read_features(path: PathLike) -> Tuple[np.ndarray, np.ndarray]:
    reader = BinaryReader.open(path)
    reader.expect_magic(FEATURE_MAGIC, FORMAT_VERSION)
    T, d_v, d_f = reader.u32s(3)
    snippet = reader.f32((T, d_v))
    frame = reader.f32((T, d_f))
    reader.expect_end()
    return snippet, frame
