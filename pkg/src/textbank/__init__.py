"""Vocabularies, prompts and aggregated class embeddings."""

from .vocabulary import (
    Vocabulary,
    VocabularyEntry,
    load_vocabulary,
    write_vocabulary,
    normalize_name
)
from .prompts import render_prompt, write_description_sidecar, read_description_sidecar
from .embeddings import (
    DescriptionSet,
    ClassEmbeddingTable,
    aggregate_embeddings,
    build_table,
    select_split,
    merge_tables
)
from .formats import (
    write_description_file,
    read_description_file,
    write_table,
    read_table
)
from .synthetic import SyntheticEmbeddingProvider

__all__ = [
    'Vocabulary',
    'VocabularyEntry',
    'load_vocabulary',
    'write_vocabulary',
    'normalize_name',
    'render_prompt',
    'write_description_sidecar',
    'read_description_sidecar',
    'DescriptionSet',
    'ClassEmbeddingTable',
    'aggregate_embeddings',
    'build_table',
    'select_split',
    'merge_tables',
    'write_description_file',
    'read_description_file',
    'write_table',
    'read_table',
    'SyntheticEmbeddingProvider'
]
