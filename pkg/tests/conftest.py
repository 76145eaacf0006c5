"""Shared fixtures: a tiny model, a three-class vocabulary and one short video."""

import numpy as np
import pytest

from src.datasets import ActionAnnotation, VideoFeatures
from src.model import ModelConfig, init_params
from src.textbank import ClassEmbeddingTable, Vocabulary, VocabularyEntry


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_config():
    return ModelConfig(d_v=6, d_f=5, dim=8, dim_hat=8, heads=2, levels=2, text_dim=4,
                       ffn_mult=2, head_layers=1, head_kernel=3, max_seq_len=8)


@pytest.fixture
def tiny_params(tiny_config):
    return init_params(tiny_config, seed=3)


@pytest.fixture
def tiny_vocab():
    return Vocabulary([
        VocabularyEntry(0, 'Billiards', 'base'),
        VocabularyEntry(1, 'Diving', 'base'),
        VocabularyEntry(2, 'HighJump', 'novel'),
    ])


@pytest.fixture
def tiny_table():
    matrix = np.random.default_rng(7).standard_normal((3, 4))
    return ClassEmbeddingTable(matrix, (0, 1, 2))


@pytest.fixture
def tiny_video():
    rng = np.random.default_rng(11)
    return VideoFeatures('v0', rng.standard_normal((8, 6)), rng.standard_normal((8, 5)),
                         [ActionAnnotation(2.0, 7.0, 1)])
