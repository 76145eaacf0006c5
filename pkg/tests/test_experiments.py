import json

import pytest

from src.core.constants import SPLIT_BASE, SPLIT_NOVEL
from src.experiments import (
    ACTION_NAMES,
    ExperimentConfig,
    build_acceptance_data,
    compare_mixer_ablation,
    compare_pretraining,
    run_ovtal,
    split_names,
)
from src.textbank import load_vocabulary


@pytest.fixture
def small():
    return ExperimentConfig(n_super=4, n_base=3, n_test=2, T=32, actions_per_video=1,
                            descriptions=2, stage1_epochs=1, stage2_epochs=1, threads=1)


class TestSplitNames:
    def test_disjoint_and_sorted(self, small):
        base, novel = split_names(0, small)
        assert len(base) == 8 and len(novel) == 4
        assert not set(base) & set(novel)
        assert set(base) | set(novel) <= set(ACTION_NAMES)
        assert base == sorted(base) and novel == sorted(novel)

    def test_deterministic(self, small):
        assert split_names(5, small) == split_names(5, small)
        assert split_names(0, small) != split_names(1, small)


class TestAcceptanceData:
    def test_layout(self, small, tmp_path):
        data = build_acceptance_data(tmp_path, 0, small)
        for role in ('super', 'base', 'test'):
            assert data.vocab[role].exists()
            assert data.tables[role].exists()
            assert data.manifests[role].exists()
            assert (tmp_path / role / 'descriptions.ovtb').exists()

    def test_test_vocabulary_extends_base(self, small, tmp_path):
        data = build_acceptance_data(tmp_path, 0, small)
        base = load_vocabulary(data.vocab['base'])
        test = load_vocabulary(data.vocab['test'])
        assert len(load_vocabulary(data.vocab['super'])) == len(ACTION_NAMES)
        assert [e.name for e in test if e.split == SPLIT_BASE] == [e.name for e in base]
        assert sum(e.split == SPLIT_NOVEL for e in test) == 4


class TestRunOvtal:
    def test_small_run_writes_report(self, small, tmp_path):
        report = run_ovtal(tmp_path, 0, cfg=small)
        for value in (report.map_base, report.map_novel, report.map_all):
            assert value is None or 0.0 <= value <= 1.0
        payload = json.loads((tmp_path / 'mixer_pre_s0' / 'eval.json').read_text())
        assert payload['config_echo']['tiou_grid'] == [0.5]

    def test_scratch_skips_stage_one(self, small, tmp_path):
        data = build_acceptance_data(tmp_path / 'data', 0, small)
        run_ovtal(tmp_path, 0, late_fusion_only=True, stage1_init=False, cfg=small, data=data)
        run_dir = tmp_path / 'late_scratch_s0'
        assert (run_dir / 'eval.json').exists()
        assert not (run_dir / 'stageone_last.ovck').exists()


@pytest.mark.slow
class TestAcceptance:
    def test_base_and_novel_map(self, tmp_path):
        report = run_ovtal(tmp_path, 0)
        assert report.map_base >= 0.80
        assert report.map_novel >= 0.40

    def test_mixer_beats_late_fusion(self, tmp_path):
        mixer, late = compare_mixer_ablation(tmp_path)
        assert mixer - late >= 0.10

    def test_pretraining_helps_novel_classes(self, tmp_path):
        pre, scratch = compare_pretraining(tmp_path)
        assert pre > scratch
