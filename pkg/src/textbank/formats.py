"""
On-disk formats for description embeddings (OVTB) and aggregated tables (OVZL).
"""

from pathlib import Path
from typing import List, Sequence, Union

from ..core.binary import BinaryReader, write_f32, write_header, write_u32
from ..core.constants import DESCRIPTION_MAGIC, FORMAT_VERSION, TABLE_MAGIC
from ..core.exceptions import FormatError
from .embeddings import ClassEmbeddingTable, DescriptionSet

PathLike = Union[str, Path]


def write_description_file(sets: Sequence[DescriptionSet], path: PathLike) -> Path:
    """
    Write per-description embeddings.

    Layout: "OVTB", u32 version, u32 A, u32 E_max, u32 s, then per class
    u32 class_id, u32 E, E x s float32.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    dims = {s.embeddings.shape[1] for s in sets}
    if len(dims) > 1:
        raise FormatError(str(path), f'mixed embedding widths {sorted(dims)}')
    dim = dims.pop() if dims else 0
    e_max = max((s.embeddings.shape[0] for s in sets), default=0)
    with open(path, 'wb') as f:
        write_header(f, DESCRIPTION_MAGIC, FORMAT_VERSION, len(sets), e_max, dim)
        for s in sorted(sets, key=lambda d: d.class_id):
            write_u32(f, s.class_id)
            write_u32(f, s.embeddings.shape[0])
            write_f32(f, s.embeddings)
    return path


def read_description_file(path: PathLike) -> List[DescriptionSet]:
    reader = BinaryReader.open(path)
    reader.expect_magic(DESCRIPTION_MAGIC, FORMAT_VERSION)
    n_classes, e_max, dim = reader.u32s(3)
    sets = []
    for _ in range(n_classes):
        class_id, count = reader.u32s(2)
        if count == 0 or count > e_max:
            raise FormatError(str(path), f'class {class_id}: bad description count {count}')
        vectors = reader.f32((count, dim))
        sets.append(DescriptionSet(class_id, [''] * count, vectors))
    reader.expect_end()
    return sets


def write_table(table: ClassEmbeddingTable, path: PathLike) -> Path:
    """Layout: "OVZL", u32 version, u32 A, u32 s, A x s float32 (rows by class id)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if list(table.class_ids) != list(range(table.num_classes)):
        raise FormatError(str(path), 'only full tables (ids 0..A-1) can be written')
    with open(path, 'wb') as f:
        write_header(f, TABLE_MAGIC, FORMAT_VERSION, table.num_classes, table.dim)
        write_f32(f, table.matrix)
    return path


def read_table(path: PathLike) -> ClassEmbeddingTable:
    reader = BinaryReader.open(path)
    reader.expect_magic(TABLE_MAGIC, FORMAT_VERSION)
    n_classes, dim = reader.u32s(2)
    matrix = reader.f32((n_classes, dim))
    reader.expect_end()
    return ClassEmbeddingTable(matrix)
