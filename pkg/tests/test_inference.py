import math

import numpy as np
import pytest

import src.inference.predictor as predictor_module
from src.core.exceptions import ConfigurationError, DataError, FormatError, UsageError
from src.datasets import ActionAnnotation, VideoFeatures
from src.inference import (
    Detection,
    InferenceConfig,
    decode,
    inference_tables,
    nms,
    predict_dataset,
    predict_video,
    read_predictions,
    ranking_key,
    temporal_iou,
    write_predictions,
)
from src.losses import assign_targets
from src.model import forward


def one_hot_level(length, t, logit=20.0, columns=1, column=0):
    logits = np.full((length, columns), -np.inf)
    logits[t, column] = logit
    return logits


def brute_force_nms(dets, thresh, class_aware):
    remaining = sorted(dets, key=ranking_key)
    kept = []
    while remaining:
        best = remaining.pop(0)
        kept.append(best)
        remaining = [
            d for d in remaining
            if (class_aware and d.class_id != best.class_id)
            or temporal_iou((d.start, d.end), (best.start, best.end)) <= thresh
        ]
    return kept


class TestDetection:
    def test_degenerate(self):
        with pytest.raises(DataError):
            Detection(3.0, 3.0, 0, 0.5)

    def test_shifted(self):
        assert Detection(1.0, 2.0, 4, 0.5).shifted(10) == Detection(11.0, 12.0, 4, 0.5)


class TestDecode:
    def test_all_background(self):
        assert decode([np.full((16, 3), -np.inf)], [np.ones((16, 2))]) == []

    def test_first_level(self):
        (det,) = decode([one_hot_level(20, 14)], [np.full((20, 2), 5.0)])
        assert (det.start, det.end, det.class_id) == (10.0, 20.0, 0)
        assert det.score == pytest.approx(1.0 / (1.0 + math.exp(-20.0)))

    def test_stride_scales_offsets(self):
        logits = [np.full((32, 1), -np.inf), one_hot_level(16, 7)]
        offsets = [np.ones((32, 2)), np.full((16, 2), 5.0)]
        (det,) = decode(logits, offsets, T=32.0)
        assert (det.start, det.end) == (5.0, 25.0)

    def test_clamped_to_sequence(self):
        (det,) = decode([one_hot_level(10, 1)], [np.full((10, 2), 4.0)])
        assert (det.start, det.end) == (1.0, 6.0)

    def test_masked_steps_are_skipped(self):
        logits = [np.full((8, 1), 5.0)]
        mask = np.arange(8) < 3
        dets = decode(logits, [np.ones((8, 2))], masks=[mask])
        assert len(dets) == 3

    def test_topk_and_order(self, rng):
        logits = [rng.standard_normal((16, 3))]
        dets = decode(logits, [np.full((16, 2), 2.0)], score_thresh=0.01, pre_nms_topk=10)
        assert len(dets) == 10
        assert dets == sorted(dets, key=ranking_key)

    def test_class_ids_follow_columns(self):
        (det,) = decode([one_hot_level(8, 3, columns=2, column=1)], [np.ones((8, 2))],
                        class_ids=[5, 9])
        assert det.class_id == 9

    @pytest.mark.parametrize('kwargs', [{'score_thresh': 0.0}, {'score_thresh': 1.0},
                                        {'pre_nms_topk': 0}])
    def test_invalid_settings(self, kwargs):
        with pytest.raises(UsageError):
            decode([np.zeros((4, 1))], [np.ones((4, 2))], **kwargs)

    def test_inverts_target_assignment(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            T = 64
            annotations = []
            cursor = 1.0
            while len(annotations) < 3:
                start = cursor + float(rng.integers(0, 6))
                end = start + float(rng.integers(2, 20))
                if end > T:
                    break
                annotations.append(ActionAnnotation(start, end, int(rng.integers(0, 2))))
                cursor = end + 1.0
            lengths = [64, 32, 16, 8]
            assignment = assign_targets(annotations, lengths, {0: 0, 1: 1})
            logits = [np.where(level.classes > 0, 30.0, -30.0) for level in assignment.levels]
            offsets = [np.where(level.positive[:, None], level.offsets, 1.0)
                       for level in assignment.levels]
            dets = decode(logits, offsets, score_thresh=0.5, pre_nms_topk=10 ** 6, T=float(T))
            assert len(dets) == assignment.num_positive
            for det in dets:
                assert any(abs(det.start - a.start) < 1e-9 and abs(det.end - a.end) < 1e-9
                           and det.class_id == a.class_id for a in annotations)


class TestTemporalIoU:
    def test_identical(self):
        assert temporal_iou((2.0, 5.0), (2.0, 5.0)) == 1.0

    def test_disjoint(self):
        assert temporal_iou((0.0, 1.0), (2.0, 3.0)) == 0.0

    def test_partial(self):
        assert temporal_iou((0.0, 1.0), (0.5, 1.5)) == pytest.approx(1.0 / 3.0)

    def test_degenerate(self):
        with pytest.raises(UsageError):
            temporal_iou((1.0, 1.0), (0.0, 2.0))


class TestNMS:
    def test_empty(self):
        assert nms([]) == []

    def test_hand_trace(self):
        a = Detection(0.0, 1.0, 0, 0.9)
        b = Detection(0.1, 1.1, 0, 0.8)
        c = Detection(2.0, 3.0, 0, 0.7)
        assert nms([c, b, a], 0.5) == [a, c]

    def test_threshold_one_keeps_everything(self):
        dets = [Detection(0.0, 1.0, 0, 0.9), Detection(0.0, 1.0, 0, 0.8)]
        assert nms(dets, 1.0) == dets

    def test_other_classes_survive_when_class_aware(self):
        a = Detection(0.0, 1.0, 0, 0.9)
        b = Detection(0.0, 1.0, 1, 0.8)
        assert nms([a, b], 0.5, class_aware=True) == [a, b]
        assert nms([a, b], 0.5, class_aware=False) == [a]

    def test_invalid_threshold(self):
        with pytest.raises(UsageError):
            nms([], 0.0)

    @pytest.mark.parametrize('class_aware', [True, False])
    def test_matches_brute_force(self, class_aware):
        rng = np.random.default_rng(99)
        for _ in range(500):
            dets = []
            for _ in range(int(rng.integers(0, 12))):
                start = float(rng.integers(0, 20))
                dets.append(Detection(start, start + float(rng.integers(1, 8)),
                                      int(rng.integers(0, 3)),
                                      float(rng.choice([0.2, 0.4, 0.6, 0.8]))))
            thresh = float(rng.choice([0.3, 0.5, 0.7]))
            kept = nms(dets, thresh, class_aware)
            assert kept == brute_force_nms(dets, thresh, class_aware)
            assert all(d in dets for d in kept)
            scores = [d.score for d in kept]
            assert scores == sorted(scores, reverse=True)
            for i, x in enumerate(kept):
                for y in kept[i + 1:]:
                    if class_aware and x.class_id != y.class_id:
                        continue
                    assert temporal_iou((x.start, x.end), (y.start, y.end)) <= thresh


class TestInferenceConfig:
    def test_rejects_bad_selection(self):
        with pytest.raises(ConfigurationError):
            InferenceConfig(selection='super')

    def test_rejects_bad_threshold(self):
        with pytest.raises(ConfigurationError):
            InferenceConfig(nms_thresh=1.5)


class TestPredict:
    def test_vocabulary_swap_keeps_novel_columns(self, tiny_config, tiny_params, tiny_table,
                                                 tiny_vocab, tiny_video):
        context, novel = inference_tables(tiny_table, tiny_vocab, 'novel')
        full = forward(tiny_video, context, tiny_params, tiny_config)
        swapped = forward(tiny_video, context, tiny_params, tiny_config, classify_table=novel)
        for all_logits, novel_logits in zip(full.logits, swapped.logits):
            np.testing.assert_allclose(novel_logits.data, all_logits.data[:, [2]],
                                       rtol=0, atol=1e-12)

    def test_novel_selection_only_reports_novel(self, tiny_config, tiny_params, tiny_table,
                                                tiny_vocab, tiny_video):
        context, novel = inference_tables(tiny_table, tiny_vocab, 'novel')
        cfg = InferenceConfig(score_thresh=1e-6)
        dets = predict_video(tiny_video, context, tiny_params, tiny_config, cfg, novel)
        assert dets
        assert {d.class_id for d in dets} == {2}

    def test_long_video_detections_in_video_coordinates(self, tiny_config, tiny_params,
                                                        tiny_table):
        rng = np.random.default_rng(5)
        video = VideoFeatures('long', rng.standard_normal((20, 6)),
                              rng.standard_normal((20, 5)))
        cfg = InferenceConfig(score_thresh=1e-6, max_detections=1000)
        dets = predict_video(video, tiny_table, tiny_params, tiny_config, cfg)
        assert dets
        assert all(1.0 <= d.start < d.end <= 20.0 for d in dets)
        assert any(d.end > 8.0 for d in dets)
        assert len(dets) <= 1000

    def test_candidates_capped_per_video(self, tiny_config, tiny_params, tiny_table,
                                         monkeypatch):
        rng = np.random.default_rng(5)
        video = VideoFeatures('long', rng.standard_normal((20, 6)),
                              rng.standard_normal((20, 5)))
        sizes = []
        real_nms = predictor_module.nms

        def recording_nms(dets, *args, **kwargs):
            sizes.append(len(dets))
            return real_nms(dets, *args, **kwargs)

        monkeypatch.setattr(predictor_module, 'nms', recording_nms)
        cfg = InferenceConfig(score_thresh=1e-6, pre_nms_topk=5)
        dets = predict_video(video, tiny_table, tiny_params, tiny_config, cfg)
        assert sizes == [5]
        assert 0 < len(dets) <= 5

    def test_dataset_is_thread_independent(self, tiny_config, tiny_params, tiny_table,
                                           tiny_video):
        rng = np.random.default_rng(6)
        videos = [tiny_video] + [
            VideoFeatures(f'v{i}', rng.standard_normal((8, 6)), rng.standard_normal((8, 5)))
            for i in range(1, 4)
        ]
        cfg = InferenceConfig(score_thresh=1e-3)
        one = predict_dataset(videos, tiny_table, tiny_params, tiny_config, cfg, threads=1)
        four = predict_dataset(videos, tiny_table, tiny_params, tiny_config, cfg, threads=4)
        assert list(one) == ['v0', 'v1', 'v2', 'v3']
        assert one == four


class TestPredictionsFile:
    def test_round_trip(self, tmp_path):
        predictions = {'a': [Detection(1.0, 4.5, 2, 0.75), Detection(2.0, 3.0, 0, 0.125)],
                       'b': []}
        path = write_predictions(predictions, tmp_path / 'pred.json')
        assert read_predictions(path) == predictions

    def test_malformed(self, tmp_path):
        path = tmp_path / 'pred.json'
        path.write_text('[{"video_id": "a", "detections": [{"start": 2, "end": 1, '
                        '"class_id": 0, "score": 0.5}]}]')
        with pytest.raises(FormatError, match='entry 0'):
            read_predictions(path)

    def test_not_json(self, tmp_path):
        path = tmp_path / 'pred.json'
        path.write_text('not json')
        with pytest.raises(FormatError, match='invalid JSON'):
            read_predictions(path)
