import numpy as np
import pytest

from src.core.exceptions import (
    CheckpointMismatchError,
    ConfigurationError,
    FormatError,
    UsageError,
)
from src.datasets import ActionAnnotation, VideoFeatures
from src.model import ModelConfig, forward, init_params
from src.tensor import Tensor
from src.textbank import select_split
from src.training import (
    AdamWState,
    EpochLoss,
    TrainConfig,
    TrainReport,
    clip_gradients,
    finetune_stage2,
    get_preset,
    load_checkpoint,
    lr_at,
    optimizer_step,
    read_train_log,
    save_checkpoint,
    train_stage1,
    write_train_log,
)
from src.model.params import ModelParams


@pytest.fixture
def videos(tiny_video):
    rng = np.random.default_rng(21)
    second = VideoFeatures('v1', rng.standard_normal((12, 6)), rng.standard_normal((12, 5)),
                           [ActionAnnotation(1.0, 4.0, 0), ActionAnnotation(6.0, 11.0, 2)])
    return [tiny_video, second]


@pytest.fixture
def quick():
    return TrainConfig(epochs=2, warmup_epochs=0, batch_size=2, lr=1e-2)


def single(value):
    return ModelParams({'w.weight': Tensor(np.asarray(value, dtype=np.float64))})


class TestOptimizer:
    def test_zero_gradient_leaves_parameters(self):
        params = single([[0.5, -1.0]])
        optimizer_step(params, AdamWState(weight_decay=0.0), 0.1,
                       grads={'w.weight': np.zeros((1, 2))})
        np.testing.assert_array_equal(params['w.weight'].data, [[0.5, -1.0]])

    def test_first_step_moves_by_lr_against_sign(self):
        params = single([[0.5, -1.0, 2.0]])
        grads = {'w.weight': np.array([[0.3, -0.2, 0.01]])}
        optimizer_step(params, AdamWState(weight_decay=0.0), 0.01, grad_clip=10.0,
                       grads=grads)
        np.testing.assert_allclose(params['w.weight'].data, [[0.49, -0.99, 1.99]], atol=1e-6)

    def test_clipping_halves_an_oversized_gradient(self):
        raw = {'w.weight': np.array([[1.2, 1.6]])}
        clipped, norm = clip_gradients(raw, 1.0)
        assert norm == pytest.approx(2.0)
        np.testing.assert_allclose(clipped['w.weight'], raw['w.weight'] / 2)

        state = AdamWState(weight_decay=0.0)
        optimizer_step(single([[0.0, 0.0]]), state, 0.01, grad_clip=1.0, grads=raw)
        np.testing.assert_allclose(state.m['w.weight'], 0.1 * raw['w.weight'] / 2)

    def test_small_gradient_is_not_clipped(self):
        raw = {'w.weight': np.array([[0.3, 0.4]])}
        clipped, norm = clip_gradients(raw, 1.0)
        assert clipped is raw and norm == pytest.approx(0.5)

    def test_frozen_names_are_skipped(self):
        params = single([[1.0]])
        state = AdamWState()
        optimizer_step(params, state, 0.1, frozen={'w.weight'},
                       grads={'w.weight': np.array([[5.0]])})
        np.testing.assert_array_equal(params['w.weight'].data, [[1.0]])
        assert 'w.weight' not in state.m

    def test_biases_are_not_decayed(self):
        params = ModelParams({'a.weight': Tensor([1.0]), 'a.bias': Tensor([1.0])})
        optimizer_step(params, AdamWState(weight_decay=0.5), 0.1,
                       grads={'a.weight': np.zeros(1), 'a.bias': np.zeros(1)})
        assert params['a.bias'].data[0] == 1.0
        assert params['a.weight'].data[0] == pytest.approx(0.95)


class TestSchedule:
    def test_warmup_is_linear(self):
        assert lr_at(0, 100, 10, 1.0) == pytest.approx(0.1)
        assert lr_at(4, 100, 10, 1.0) == pytest.approx(0.5)
        assert lr_at(9, 100, 10, 1.0) == pytest.approx(1.0)

    def test_cosine_decay(self):
        assert lr_at(10, 100, 10, 1.0) == pytest.approx(1.0)
        assert lr_at(55, 100, 10, 1.0) == pytest.approx(0.5)
        assert lr_at(100, 100, 10, 1.0) == pytest.approx(0.0, abs=1e-15)
        assert lr_at(100, 100, 10, 1.0, min_lr_ratio=0.1) == pytest.approx(0.1)

    def test_never_negative(self):
        assert all(lr_at(s, 50, 5, 2e-3) >= 0.0 for s in range(80))


class TestTrainConfig:
    def test_defaults(self):
        cfg = TrainConfig()
        assert (cfg.epochs, cfg.lr, cfg.warmup_epochs, cfg.loss_weight) == (40, 1e-3, 5, 1.0)

    def test_warmup_must_be_shorter(self):
        with pytest.raises(ConfigurationError, match='warmup_epochs'):
            TrainConfig(epochs=3, warmup_epochs=3)

    def test_stage_one_needs_an_epoch(self):
        with pytest.raises(ConfigurationError):
            TrainConfig(epochs=0, warmup_epochs=0)
        TrainConfig(stage='two', active_vocab='base', epochs=0, warmup_epochs=0)

    def test_unknown_override(self):
        with pytest.raises(ConfigurationError, match='unknown training keys'):
            TrainConfig().with_overrides(learning_rate=1.0)

    def test_presets(self):
        assert get_preset('thumos-ft').train['lr'] == 1e-4
        assert get_preset('anet-ft').model['max_seq_len'] == 192
        with pytest.raises(UsageError):
            get_preset('kinetics')


class TestCheckpoint:
    def test_round_trip_is_bit_exact(self, tiny_config, tiny_params, tiny_table, tiny_video,
                                     tmp_path):
        path = save_checkpoint(tiny_params, tiny_config, tmp_path / 'a.ovck', seed=3)
        loaded = load_checkpoint(path, tiny_config)
        assert loaded.params.equals(tiny_params)
        assert (loaded.config, loaded.seed, loaded.stage) == (tiny_config, 3, 'one')
        a = forward(tiny_video, tiny_table, tiny_params, tiny_config)
        b = forward(tiny_video, tiny_table, loaded.params, tiny_config)
        for x, y in zip(a.logits + a.offsets, b.logits + b.offsets):
            np.testing.assert_array_equal(x.data, y.data)

    def test_truncated(self, tiny_config, tiny_params, tmp_path):
        path = save_checkpoint(tiny_params, tiny_config, tmp_path / 'a.ovck')
        path.write_bytes(path.read_bytes()[:-10])
        with pytest.raises(FormatError, match='truncated'):
            load_checkpoint(path)

    def test_dimension_mismatch(self, tiny_config, tiny_params, tmp_path):
        path = save_checkpoint(tiny_params, tiny_config, tmp_path / 'a.ovck')
        wider = ModelConfig(d_v=6, d_f=5, dim=16, dim_hat=16, heads=2, levels=2, text_dim=4,
                            ffn_mult=2, head_layers=1, max_seq_len=8)
        with pytest.raises(CheckpointMismatchError, match='D: expected 16, found 8') as info:
            load_checkpoint(path, wider)
        assert info.value.exit_code == 2

    def test_no_temporary_left_behind(self, tiny_config, tiny_params, tmp_path):
        save_checkpoint(tiny_params, tiny_config, tmp_path / 'a.ovck')
        assert [p.name for p in tmp_path.iterdir()] == ['a.ovck']


class TestTrainLog:
    def test_round_trip(self, tmp_path):
        report = TrainReport('one', 0, losses=[EpochLoss(0.5, 0.25, 0.75),
                                               EpochLoss(0.1, 0.2, 0.30000000000000004)])
        path = write_train_log(report, tmp_path / 'loss.tsv')
        assert path.read_text().splitlines()[0] == 'epoch\tL_cls\tL_reg\ttotal'
        assert read_train_log(path) == report.losses

    def test_missing_header(self, tmp_path):
        path = tmp_path / 'loss.tsv'
        path.write_text('1\t0.1\t0.2\t0.3\n')
        with pytest.raises(FormatError):
            read_train_log(path)


class TestTraining:
    def test_writes_reports(self, videos, tiny_config, tiny_table, quick, tmp_path):
        params, report = train_stage1(videos, tiny_table, tiny_config, quick, tmp_path)
        assert len(report.losses) == 2
        assert all(np.isfinite(loss.total) for loss in report.losses)
        assert report.best_epoch in (1, 2)
        for name in ('stageone_best.ovck', 'stageone_last.ovck', 'stageone_loss.tsv',
                     'stageone_report.json'):
            assert (tmp_path / name).exists()
        best = load_checkpoint(tmp_path / 'stageone_best.ovck', tiny_config)
        assert best.params.equals(params)

    def test_deterministic(self, videos, tiny_config, tiny_table, quick):
        a, report_a = train_stage1(videos, tiny_table, tiny_config, quick)
        b, report_b = train_stage1(videos, tiny_table, tiny_config, quick)
        assert a.equals(b)
        assert report_a.totals == report_b.totals

    def test_zero_learning_rate_changes_nothing(self, videos, tiny_config, tiny_table, quick):
        params, _ = train_stage1(videos, tiny_table, tiny_config, quick.with_overrides(lr=0.0))
        assert params.equals(init_params(tiny_config, quick.seed))

    def test_loss_goes_down(self, videos, tiny_config, tiny_table):
        cfg = TrainConfig(epochs=8, warmup_epochs=1, batch_size=2, lr=5e-3)
        _, report = train_stage1(videos, tiny_table, tiny_config, cfg)
        assert min(report.totals[1:]) < report.totals[0]

    def test_unknown_class_in_data(self, videos, tiny_config, tiny_table, tiny_vocab, quick):
        base, _ = select_split(tiny_table, tiny_vocab, 'base')
        with pytest.raises(ConfigurationError, match='not in the active vocabulary'):
            train_stage1(videos, base, tiny_config, quick)

    def test_stage_two_needs_base_vocabulary(self, videos, tiny_config, tiny_params,
                                             tiny_table, quick):
        with pytest.raises(ConfigurationError):
            finetune_stage2(tiny_params, videos, tiny_table, tiny_config, quick)


class TestFinetune:
    @pytest.fixture
    def base_setup(self, tiny_video, tiny_table, tiny_vocab):
        base, _ = select_split(tiny_table, tiny_vocab, 'base')
        return [tiny_video], base

    def test_zero_epochs_keeps_initial_weights(self, base_setup, tiny_config, tiny_params,
                                               tmp_path):
        data, base = base_setup
        cfg = TrainConfig(stage='two', active_vocab='base', epochs=0, warmup_epochs=0)
        params, report = finetune_stage2(tiny_params, data, base, tiny_config, cfg, tmp_path)
        assert params.equals(tiny_params)
        assert report.losses == []
        assert load_checkpoint(tmp_path / 'stagetwo_best.ovck').params.equals(tiny_params)

    def test_frozen_encoder_is_bitwise_unchanged(self, base_setup, tiny_config, tiny_params):
        data, base = base_setup
        cfg = TrainConfig(stage='two', active_vocab='base', epochs=2, warmup_epochs=0,
                          lr=1e-2, freeze='enc')
        params, _ = finetune_stage2(tiny_params, data, base, tiny_config, cfg)
        encoder = tiny_params.encoder_names()
        assert params.equals(tiny_params, encoder)
        assert not params.equals(tiny_params, tiny_params.decoder_names())

    def test_loads_from_checkpoint_path(self, base_setup, tiny_config, tiny_params, tmp_path):
        data, base = base_setup
        path = save_checkpoint(tiny_params, tiny_config, tmp_path / 'one.ovck')
        cfg = TrainConfig(stage='two', active_vocab='base', epochs=0, warmup_epochs=0)
        params, _ = finetune_stage2(path, data, base, tiny_config, cfg)
        assert params.equals(tiny_params)

    def test_mismatched_initial_weights(self, base_setup, tiny_config, tiny_params, tmp_path):
        data, base = base_setup
        path = save_checkpoint(tiny_params, tiny_config, tmp_path / 'one.ovck')
        other = ModelConfig(d_v=6, d_f=5, dim=8, dim_hat=8, heads=2, levels=3, text_dim=4,
                            ffn_mult=2, head_layers=1, max_seq_len=8)
        cfg = TrainConfig(stage='two', active_vocab='base', epochs=0, warmup_epochs=0)
        with pytest.raises(CheckpointMismatchError, match='M: expected 3, found 2'):
            finetune_stage2(path, data, base, other, cfg)
