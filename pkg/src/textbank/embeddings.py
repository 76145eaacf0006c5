"""
Class-embedding aggregation.

Each class embedding is the arithmetic mean of the embeddings of its E
generated descriptions. Sums are exactly rounded (math.fsum), so the mean does
not depend on description order.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from config.settings import NORMALIZE_DESCRIPTIONS
from ..core.constants import SELECTIONS
from ..core.exceptions import DataError, UsageError
from .vocabulary import Vocabulary


@dataclass
class DescriptionSet:
    """Descriptions of one class and their pre-computed embeddings."""
    class_id: int
    descriptions: List[str]
    embeddings: np.ndarray  # E x s

    def __post_init__(self):
        self.embeddings = np.atleast_2d(np.asarray(self.embeddings, dtype=np.float64))


@dataclass
class ClassEmbeddingTable:
    """
    Aggregated class embeddings, one row per class.

    Attributes:
        matrix: A x s array; row i belongs to class_ids[i]
        class_ids: Original vocabulary ids of the rows
    """
    matrix: np.ndarray
    class_ids: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        self.matrix = np.atleast_2d(np.asarray(self.matrix, dtype=np.float64))
        if not self.class_ids:
            self.class_ids = tuple(range(self.matrix.shape[0]))
        self.class_ids = tuple(int(c) for c in self.class_ids)
        if len(self.class_ids) != self.matrix.shape[0]:
            raise DataError(
                f'table has {self.matrix.shape[0]} rows but {len(self.class_ids)} class ids'
            )
        if not np.all(np.isfinite(self.matrix)):
            raise DataError('class embedding table contains NaN or Inf')

    @property
    def num_classes(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def column_of(self) -> Dict[int, int]:
        """Map original class id to row index."""
        return {c: i for i, c in enumerate(self.class_ids)}


def aggregate_embeddings(desc: DescriptionSet,
                         normalize: bool = NORMALIZE_DESCRIPTIONS) -> np.ndarray:
    """
    Mean of a class's description embeddings.

    Args:
        desc: Description set with E >= 1 vectors of a common dimension
        normalize: L2-normalize each vector before averaging

    Returns:
        Vector of dimension s

    Raises:
        DataError: If E == 0 or the vectors disagree in dimension
    """
    vectors = [np.asarray(v, dtype=np.float64).reshape(-1) for v in desc.embeddings]
    if not vectors:
        raise DataError(f'class {desc.class_id}: no description embeddings')
    dims = {v.size for v in vectors}
    if len(dims) != 1:
        raise DataError(
            f'class {desc.class_id}: description embeddings have dimensions {sorted(dims)}'
        )
    if normalize:
        vectors = [v / max(np.linalg.norm(v), 1e-12) for v in vectors]
    stacked = np.stack(vectors)
    E = stacked.shape[0]
    return np.array([math.fsum(column) / E for column in stacked.T])


def build_table(vocab: Vocabulary, sets: Sequence[DescriptionSet],
                normalize: bool = NORMALIZE_DESCRIPTIONS) -> ClassEmbeddingTable:
    """
    Aggregate one description set per vocabulary class into a table.

    Raises:
        DataError: On a missing, duplicate or unknown class
    """
    by_class: Dict[int, DescriptionSet] = {}
    for s in sets:
        if s.class_id not in vocab:
            raise DataError(f'description set for unknown class {s.class_id}')
        if s.class_id in by_class:
            raise DataError(
                f'duplicate description set for class {s.class_id} ({vocab[s.class_id].name})'
            )
        by_class[s.class_id] = s
    rows = []
    for entry in vocab:
        if entry.class_id not in by_class:
            raise DataError(
                f'missing description set for class {entry.class_id} ({entry.name})'
            )
        rows.append(aggregate_embeddings(by_class[entry.class_id], normalize))
    dims = {r.size for r in rows}
    if len(dims) > 1:
        raise DataError(f'classes disagree on embedding width: {sorted(dims)}')
    return ClassEmbeddingTable(np.stack(rows), tuple(e.class_id for e in vocab))


def select_split(table: ClassEmbeddingTable, vocab: Vocabulary,
                 which: str) -> Tuple[ClassEmbeddingTable, Dict[int, int]]:
    """
    Restrict a table to the base, novel or all classes.

    Returns:
        (sub-table, id_map) where id_map sends an original class id to its row
        in the sub-table; rows keep vocabulary order

    Raises:
        UsageError: On an unknown selection or an empty split
        DataError: If table and vocabulary disagree
    """
    if which not in SELECTIONS:
        raise UsageError(f'unknown split selection {which!r}; expected one of {SELECTIONS}')
    if set(table.class_ids) != {e.class_id for e in vocab}:
        raise DataError('embedding table and vocabulary cover different classes')
    wanted = set(vocab.ids_in_split(which))
    if not wanted:
        raise UsageError(f'split {which!r} has no classes')
    rows = [i for i, c in enumerate(table.class_ids) if c in wanted]
    ids = tuple(table.class_ids[i] for i in rows)
    sub = ClassEmbeddingTable(table.matrix[rows].copy(), ids)
    return sub, {c: i for i, c in enumerate(ids)}


def merge_tables(parts: Sequence[ClassEmbeddingTable]) -> ClassEmbeddingTable:
    """Reassemble sub-tables into one table ordered by class id."""
    pairs: List[Tuple[int, np.ndarray]] = []
    for part in parts:
        pairs.extend(zip(part.class_ids, part.matrix))
    pairs.sort(key=lambda p: p[0])
    if len({c for c, _ in pairs}) != len(pairs):
        raise DataError('overlapping sub-tables cannot be merged')
    return ClassEmbeddingTable(np.stack([row for _, row in pairs]),
                               tuple(c for c, _ in pairs))
