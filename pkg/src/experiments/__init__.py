"""Synthetic open-vocabulary experiments at desk scale."""

from .ovtal import (
    ACTION_NAMES,
    ExperimentConfig,
    AcceptanceData,
    split_names,
    build_acceptance_data,
    run_ovtal,
    compare_mixer_ablation,
    compare_pretraining
)

__all__ = [
    'ACTION_NAMES',
    'ExperimentConfig',
    'AcceptanceData',
    'split_names',
    'build_acceptance_data',
    'run_ovtal',
    'compare_mixer_ablation',
    'compare_pretraining'
]
