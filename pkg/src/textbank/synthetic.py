"""
Deterministic stand-in for the text encoder.

Each class gets a unit-norm prototype keyed by its normalized NAME, so one
action name carries the same semantics in every vocabulary. Descriptions are
the prototype plus a seeded perturbation; the description seed controls the
"restyling" of a class under a new vocabulary.
"""

import logging
from typing import List

import numpy as np

from config.settings import SYNTHETIC_DESCRIPTION_NOISE
from ..core.exceptions import UsageError
from ..core.seeding import derive_rng, unit_vector
from .embeddings import DescriptionSet
from .prompts import render_prompt
from .vocabulary import Vocabulary, normalize_name

logger = logging.getLogger(__name__)


class SyntheticEmbeddingProvider:
    """
    Seeded per-description embedding vectors.

    Args:
        prototype_seed: Seed of the name-keyed class prototypes (the "encoder")
        description_seed: Seed of the per-description perturbations
        noise: Perturbation scale relative to the unit prototype
    """

    def __init__(self, prototype_seed: int = 0, description_seed: int = 0,
                 noise: float = SYNTHETIC_DESCRIPTION_NOISE):
        if noise < 0:
            raise UsageError('noise must be non-negative')
        self.prototype_seed = prototype_seed
        self.description_seed = description_seed
        self.noise = noise

    def prototype(self, name: str, dim: int) -> np.ndarray:
        rng = derive_rng(self.prototype_seed, 'prototype', normalize_name(name), dim)
        return unit_vector(rng, dim)

    def describe(self, vocab: Vocabulary, per_class: int, dim: int) -> List[DescriptionSet]:
        """
        Produce E description embeddings for every class.

        Args:
            vocab: Vocabulary to describe
            per_class: Descriptions per class (E >= 1)
            dim: Embedding width s

        Returns:
            One DescriptionSet per class, in class-id order
        """
        if per_class < 1 or dim < 1:
            raise UsageError('per_class and dim must be positive')
        sets = []
        for entry in vocab:
            base = self.prototype(entry.name, dim)
            rng = derive_rng(self.description_seed, 'description',
                             normalize_name(entry.name), entry.class_id)
            vectors = base + self.noise * rng.standard_normal((per_class, dim)) / np.sqrt(dim)
            prompt = render_prompt(entry.name)
            texts = [f'{prompt} [synthetic description {r + 1}]' for r in range(per_class)]
            sets.append(DescriptionSet(entry.class_id, texts, vectors))
        logger.debug('synthesized %d x %d descriptions of width %d',
                     len(sets), per_class, dim)
        return sets
