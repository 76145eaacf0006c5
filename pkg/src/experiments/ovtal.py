"""
Desk-scale open-vocabulary experiments on synthetic data.

Sixteen action names form the large stage-one vocabulary. Eight of them are
restyled under fresh ids as the base vocabulary, and the test vocabulary
adds four of the remaining names as novel classes. Every dataset shares one
synthetic feature extractor (projection seed), so a class name carries the
same visual signature everywhere.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from config.runtime_settings import DEFAULT_THREADS
from config.settings import DESCRIPTIONS_PER_CLASS
from ..core.constants import SPLIT_BASE, SPLIT_NOVEL, SPLIT_SUPER
from ..core.seeding import derive_rng
from ..datasets.manifest import load_dataset, write_dataset
from ..datasets.synthetic import SynthConfig, synth_generate
from ..evaluation import EvalConfig, EvalReport, evaluate, write_report
from ..inference import InferenceConfig, predict_dataset
from ..model.config import ModelConfig
from ..model.params import init_params
from ..textbank import (
    SyntheticEmbeddingProvider,
    Vocabulary,
    VocabularyEntry,
    build_table,
    load_vocabulary,
    read_table,
    write_description_file,
    write_table,
    write_vocabulary,
)
from ..training import TrainConfig, finetune_stage2, get_preset, train_stage1

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

ACTION_NAMES: Tuple[str, ...] = (
    'BaseballPitch', 'BasketballDunk', 'Billiards', 'CleanAndJerk',
    'CliffDiving', 'CricketBowling', 'CricketShot', 'Diving',
    'FrisbeeCatch', 'GolfSwing', 'HammerThrow', 'HighJump',
    'JavelinThrow', 'LongJump', 'PoleVault', 'Shotput',
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Sizes and budgets of the synthetic open-vocabulary experiment."""
    n_super: int = 300
    n_base: int = 200
    n_test: int = 100
    T: int = 128
    snr: float = 8.0
    actions_per_video: int = 3
    base_classes: int = 8
    novel_classes: int = 4
    descriptions: int = DESCRIPTIONS_PER_CLASS
    stage1_epochs: int = 12
    stage2_epochs: int = 8
    tiou: float = 0.5
    threads: int = DEFAULT_THREADS

    def model_config(self, late_fusion_only: bool = False) -> ModelConfig:
        overrides = dict(get_preset('acceptance').model)
        overrides.update(max_seq_len=self.T, late_fusion_only=late_fusion_only)
        return ModelConfig(**overrides)

    def train_config(self, stage: str, seed: int) -> TrainConfig:
        overrides = dict(get_preset('acceptance').train)
        if stage == 'one':
            overrides.update(epochs=self.stage1_epochs, seed=seed,
                             warmup_epochs=min(1, self.stage1_epochs - 1))
        else:
            overrides.update(stage='two', active_vocab=SPLIT_BASE, seed=seed,
                             epochs=self.stage2_epochs,
                             warmup_epochs=min(1, max(0, self.stage2_epochs - 1)))
        return TrainConfig(**overrides)


@dataclass
class AcceptanceData:
    """Paths written by build_acceptance_data."""
    root: Path
    vocab: Dict[str, Path]
    tables: Dict[str, Path]
    manifests: Dict[str, Path]


def split_names(seed: int, cfg: ExperimentConfig) -> Tuple[List[str], List[str]]:
    """(base names, novel names), drawn without overlap from ACTION_NAMES."""
    order = derive_rng(seed, 'acceptance-split').permutation(len(ACTION_NAMES))
    names = [ACTION_NAMES[i] for i in order]
    base = sorted(names[:cfg.base_classes])
    novel = sorted(names[cfg.base_classes:cfg.base_classes + cfg.novel_classes])
    return base, novel


def build_acceptance_data(workdir: PathLike, seed: int = 0,
                          cfg: ExperimentConfig = ExperimentConfig()) -> AcceptanceData:
    """
    Write vocabularies, description embeddings, tables and datasets.

    Layout under workdir: <role>/vocab.tsv, <role>/descriptions.ovtb,
    <role>/table.ovzl and <role>/manifest.json for role in super, base, test.
    """
    root = Path(workdir)
    model_cfg = cfg.model_config()
    base_names, novel_names = split_names(seed, cfg)
    vocabularies = {
        'super': Vocabulary.from_names(sorted(ACTION_NAMES), SPLIT_SUPER),
        'base': Vocabulary.from_names(base_names, SPLIT_BASE),
        'test': Vocabulary(
            [VocabularyEntry(i, n, SPLIT_BASE) for i, n in enumerate(base_names)]
            + [VocabularyEntry(len(base_names) + i, n, SPLIT_NOVEL)
               for i, n in enumerate(novel_names)]
        ),
    }
    sizes = {'super': cfg.n_super, 'base': cfg.n_base, 'test': cfg.n_test}
    data = AcceptanceData(root, {}, {}, {})
    for index, (role, vocab) in enumerate(vocabularies.items()):
        role_dir = root / role
        provider = SyntheticEmbeddingProvider(prototype_seed=seed,
                                              description_seed=seed * 3 + index)
        sets = provider.describe(vocab, cfg.descriptions, model_cfg.text_dim)
        table = build_table(vocab, sets)
        data.vocab[role] = write_vocabulary(vocab, role_dir / 'vocab.tsv')
        write_description_file(sets, role_dir / 'descriptions.ovtb')
        data.tables[role] = write_table(table, role_dir / 'table.ovzl')
        synth = SynthConfig(seed=seed * 3 + index, n_videos=sizes[role], T=cfg.T,
                            d_v=model_cfg.d_v, d_f=model_cfg.d_f,
                            actions_per_video=cfg.actions_per_video, snr=cfg.snr,
                            projection_seed=seed, video_prefix=role)
        videos = synth_generate(synth, table, threads=cfg.threads)
        data.manifests[role] = write_dataset(videos, data.vocab[role], role_dir,
                                             f'synthetic-{role}', role)
    logger.info('acceptance data written to %s (base=%s, novel=%s)',
                root, base_names, novel_names)
    return data


def run_ovtal(workdir: PathLike, seed: int = 0, late_fusion_only: bool = False,
              stage1_init: bool = True, cfg: ExperimentConfig = ExperimentConfig(),
              data: Optional[AcceptanceData] = None) -> EvalReport:
    """
    Stage I (optional), Stage II, prediction on the test vocabulary and
    evaluation at cfg.tiou.

    Args:
        workdir: Experiment directory (data is built there when not given)
        seed: Data, init and shuffle seed
        late_fusion_only: Ablate cross-attention in the encoder
        stage1_init: Finetune from Stage I weights instead of a random init
        cfg: Experiment sizes
        data: Previously built data

    Returns:
        EvalReport of the test split
    """
    root = Path(workdir)
    if data is None:
        data = build_acceptance_data(root / 'data', seed, cfg)
    model_cfg = cfg.model_config(late_fusion_only)
    tag = f"{'late' if late_fusion_only else 'mixer'}_{'pre' if stage1_init else 'scratch'}_s{seed}"
    run_dir = root / tag

    if stage1_init:
        super_videos = load_dataset(data.manifests['super'], cfg.threads)
        init, _ = train_stage1(super_videos, read_table(data.tables['super']), model_cfg,
                               cfg.train_config('one', seed), run_dir)
    else:
        init = init_params(model_cfg, seed)
    base_videos = load_dataset(data.manifests['base'], cfg.threads)
    params, _ = finetune_stage2(init, base_videos, read_table(data.tables['base']),
                                model_cfg, cfg.train_config('two', seed), run_dir)

    test_videos = load_dataset(data.manifests['test'], cfg.threads)
    test_vocab = load_vocabulary(data.vocab['test'])
    predictions = predict_dataset(test_videos, read_table(data.tables['test']), params,
                                  model_cfg, InferenceConfig(**get_preset('acceptance').inference),
                                  threads=cfg.threads)
    report = evaluate(predictions, test_videos, test_vocab, EvalConfig((cfg.tiou,)),
                      threads=cfg.threads)
    write_report(report, run_dir / 'eval.json')
    logger.info('%s: mAP base=%s novel=%s all=%s', tag, report.map_base,
                report.map_novel, report.map_all)
    return report


def _mean_novel(reports: Sequence[EvalReport]) -> float:
    return float(np.mean([r.map_novel or 0.0 for r in reports]))


def compare_mixer_ablation(workdir: PathLike, seeds: Sequence[int] = (0, 1, 2),
                           cfg: ExperimentConfig = ExperimentConfig()) -> Tuple[float, float]:
    """
    Mean mAP_novel of (full modality mixer, late-fusion baseline) over seeds.
    """
    mixer, late = [], []
    for seed in seeds:
        data = build_acceptance_data(Path(workdir) / f'data_s{seed}', seed, cfg)
        mixer.append(run_ovtal(workdir, seed, False, True, cfg, data))
        late.append(run_ovtal(workdir, seed, True, True, cfg, data))
    return _mean_novel(mixer), _mean_novel(late)


def compare_pretraining(workdir: PathLike, seeds: Sequence[int] = (0, 1, 2),
                        cfg: ExperimentConfig = ExperimentConfig()) -> Tuple[float, float]:
    """
    Mean mAP_novel of (Stage I init, random init) over seeds, same Stage II budget.
    """
    pre, scratch = [], []
    for seed in seeds:
        data = build_acceptance_data(Path(workdir) / f'data_s{seed}', seed, cfg)
        pre.append(run_ovtal(workdir, seed, False, True, cfg, data))
        scratch.append(run_ovtal(workdir, seed, False, False, cfg, data))
    return _mean_novel(pre), _mean_novel(scratch)
