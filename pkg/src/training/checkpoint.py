"""
Checkpoint format (OVCK).

Layout: "OVCK", u32 version, model config as JSON text, u32 seed, stage text,
u32 N, then per tensor: name text, u32 rank, rank x u32 extents, float32
values. Text fields are a u32 byte length followed by UTF-8.
"""

import json
import logging
import os
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from ..core.binary import BinaryReader, write_f32, write_header, write_text, write_u32
from ..core.constants import CHECKPOINT_MAGIC, FORMAT_VERSION
from ..core.exceptions import CheckpointMismatchError, ConfigurationError, FormatError
from ..model.config import ModelConfig
from ..model.params import ModelParams, parameter_shapes
from ..tensor import Tensor

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass
class Checkpoint:
    params: ModelParams
    config: ModelConfig
    seed: int
    stage: str


def save_checkpoint(params: ModelParams, cfg: ModelConfig, path: PathLike,
                    seed: int = 0, stage: str = 'one') -> Path:
    """
    Write parameters atomically (temporary file, then rename).

    Returns:
        The checkpoint path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + '.tmp')
    with open(tmp, 'wb') as f:
        write_header(f, CHECKPOINT_MAGIC, FORMAT_VERSION)
        write_text(f, json.dumps(cfg.to_dict(), sort_keys=True))
        write_u32(f, seed)
        write_text(f, stage)
        write_u32(f, len(params))
        for name, tensor in params.items():
            write_text(f, name)
            write_u32(f, tensor.data.ndim)
            for extent in tensor.shape:
                write_u32(f, extent)
            write_f32(f, tensor.data)
    os.replace(tmp, path)
    logger.debug('wrote checkpoint %s (%d tensors)', path, len(params))
    return path


def load_checkpoint(path: PathLike,
                    expected: Optional[ModelConfig] = None) -> Checkpoint:
    """
    Read a checkpoint; nothing is returned unless the whole file parses.

    Args:
        path: Checkpoint file
        expected: Configuration the caller will run with; structural
            differences are reported before any tensor is compared

    Raises:
        FormatError: On bad magic, version, truncation or trailing bytes
        CheckpointMismatchError: If dimensions or tensor shapes disagree
    """
    reader = BinaryReader.open(path)
    reader.expect_magic(CHECKPOINT_MAGIC, FORMAT_VERSION)
    try:
        stored = ModelConfig.from_dict(json.loads(reader.text()))
    except (ValueError, TypeError, ConfigurationError) as e:
        raise FormatError(str(path), f'bad config block ({e})')
    seed = reader.u32()
    stage = reader.text()
    count = reader.u32()
    tensors = OrderedDict()
    for _ in range(count):
        name = reader.text()
        rank = reader.u32()
        shape = reader.u32s(rank)
        if name in tensors:
            raise FormatError(str(path), f'duplicate tensor {name}')
        tensors[name] = Tensor(reader.f32(shape))
    reader.expect_end()

    if expected is not None:
        problems = expected.mismatches(stored)
        if problems:
            raise CheckpointMismatchError(problems)
    params = ModelParams(tensors)
    params.check_shapes(parameter_shapes(expected or stored))
    return Checkpoint(params, stored, seed, stage)
