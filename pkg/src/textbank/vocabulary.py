"""
Action vocabularies and their base/novel/super split tags.
"""

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple, Union

from ..core.constants import SPLIT_BASE, SPLIT_NOVEL, SPLITS
from ..core.exceptions import DataError, FormatError, UsageError
from ..core.seeding import derive_rng

PathLike = Union[str, Path]


def normalize_name(name: str) -> str:
    """Collapse whitespace and case so near-duplicate names collide."""
    return ' '.join(name.split()).casefold()


@dataclass(frozen=True)
class VocabularyEntry:
    """One action category."""
    class_id: int
    name: str
    split: str


class Vocabulary:
    """
    Ordered list of action categories with contiguous ids from 0.

    Split tags are per-class labels; a class name may appear in several
    vocabularies with different tags.
    """

    def __init__(self, entries: Iterable[VocabularyEntry]):
        self.entries: Tuple[VocabularyEntry, ...] = tuple(
            sorted(entries, key=lambda e: e.class_id)
        )
        self._validate()
        self._by_id = {e.class_id: e for e in self.entries}

    def _validate(self) -> None:
        ids = [e.class_id for e in self.entries]
        if ids != list(range(len(ids))):
            raise DataError(f'class ids must be contiguous from 0, got {ids}')
        seen: Dict[str, str] = {}
        for entry in self.entries:
            if entry.split not in SPLITS:
                raise DataError(
                    f'class {entry.class_id} ({entry.name}): unknown split {entry.split!r}'
                )
            if not entry.name.strip():
                raise DataError(f'class {entry.class_id}: empty name')
            key = normalize_name(entry.name)
            if key in seen:
                raise DataError(
                    f'duplicate class name {entry.name!r} (clashes with {seen[key]!r})'
                )
            seen[key] = entry.name

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, class_id: int) -> VocabularyEntry:
        try:
            return self._by_id[class_id]
        except KeyError:
            raise DataError(f'unknown class id {class_id}')

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.entries == other.entries

    def __contains__(self, class_id: int) -> bool:
        return class_id in self._by_id

    @property
    def names(self) -> List[str]:
        return [e.name for e in self.entries]

    def ids_in_split(self, which: str) -> List[int]:
        """Class ids selected by base|novel|all (all keeps every class)."""
        if which == 'all':
            return [e.class_id for e in self.entries]
        return [e.class_id for e in self.entries if e.split == which]

    def split_of(self, class_id: int) -> str:
        return self[class_id].split

    @classmethod
    def from_names(cls, names: Sequence[str], split: str) -> 'Vocabulary':
        return cls(VocabularyEntry(i, n, split) for i, n in enumerate(names))

    @classmethod
    def random_split(cls, names: Sequence[str], novel_fraction: float,
                     seed: int) -> 'Vocabulary':
        """
        Tag a random subset of categories as novel.

        Args:
            names: Category names; ids are assigned in sorted-name order
            novel_fraction: Share of categories held out (0.25 or 0.5 in the
                usual protocols)
            seed: Split seed

        Returns:
            Vocabulary with round(A * novel_fraction) novel classes
        """
        if not 0.0 < novel_fraction < 1.0:
            raise UsageError(f'novel_fraction {novel_fraction} outside (0, 1)')
        ordered = sorted(names, key=normalize_name)
        n_novel = int(math.floor(len(ordered) * novel_fraction + 0.5))
        rng = derive_rng(seed, 'category-split')
        novel = set(rng.permutation(len(ordered))[:n_novel].tolist())
        return cls(
            VocabularyEntry(i, name, SPLIT_NOVEL if i in novel else SPLIT_BASE)
            for i, name in enumerate(ordered)
        )


def load_vocabulary(path: PathLike) -> Vocabulary:
    """
    Read a vocabulary file: one ``<id>\\t<split>\\t<name>`` line per class.

    Raises:
        FormatError: If a line does not parse
        DataError: If the vocabulary invariants fail
    """
    try:
        text = Path(path).read_text(encoding='utf-8')
    except (OSError, UnicodeDecodeError) as e:
        raise FormatError(str(path), f'cannot read vocabulary ({e})')
    entries = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split('\t')
        if len(parts) != 3:
            raise FormatError(str(path), f'line {lineno}: expected 3 tab-separated fields')
        try:
            class_id = int(parts[0])
        except ValueError:
            raise FormatError(str(path), f'line {lineno}: bad class id {parts[0]!r}')
        entries.append(VocabularyEntry(class_id, parts[2].strip(), parts[1].strip()))
    return Vocabulary(entries)


def write_vocabulary(vocab: Vocabulary, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f'{e.class_id}\t{e.split}\t{e.name}' for e in vocab]
    path.write_text('\n'.join(lines) + '\n', encoding='utf-8')
    return path
