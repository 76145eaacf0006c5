import json

import numpy as np
import pytest

from src.core.exceptions import ConfigurationError, DataError, FormatError
from src.datasets import ActionAnnotation, VideoFeatures
from src.evaluation import (
    EvalConfig,
    EvalReport,
    average_precision,
    average_reports,
    evaluate,
    labels_path,
    read_report,
    table_path,
    write_report,
)
from src.inference import Detection, temporal_iou


def oracle_ap(dets, gts, thresh):
    """Exhaustive re-computation of greedy matching and all-point AP."""
    n_gt = sum(len(v) for v in gts.values())
    if n_gt == 0:
        return None
    ranked = sorted(dets, key=lambda d: (-d[3], d[1], d[0]))
    used = {vid: [False] * len(segs) for vid, segs in gts.items()}
    flags = []
    for vid, start, end, _ in ranked:
        best, best_iou = None, -1.0
        for j, seg in enumerate(gts.get(vid, [])):
            if used[vid][j]:
                continue
            iou = temporal_iou((start, end), seg)
            if iou > best_iou:
                best, best_iou = j, iou
        hit = best is not None and best_iou >= thresh
        if hit:
            used[vid][best] = True
        flags.append(hit)
    precision = []
    tp = 0
    for k, hit in enumerate(flags, start=1):
        tp += hit
        precision.append(tp / k)
    return sum(max(precision[k:]) / n_gt for k, hit in enumerate(flags) if hit)


def video(video_id, annotations, T=40):
    return VideoFeatures(video_id, np.zeros((T, 1)), np.zeros((T, 1)), annotations)


class TestAveragePrecision:
    def test_single_match(self):
        assert average_precision([('v', 1.0, 5.0, 0.9)], {'v': [(1.0, 5.0)]}, 0.5) == 1.0

    def test_false_positive_ranked_first(self):
        dets = [('v', 20.0, 25.0, 0.9), ('v', 1.0, 5.0, 0.8)]
        assert average_precision(dets, {'v': [(1.0, 5.0)]}, 0.5) == pytest.approx(0.5)

    def test_no_detections(self):
        assert average_precision([], {'v': [(1.0, 5.0)]}, 0.5) == 0.0

    def test_no_ground_truth(self):
        assert average_precision([('v', 1.0, 5.0, 0.9)], {}, 0.5) is None

    def test_duplicates_count_once(self):
        dets = [('v', 1.0, 5.0, 0.9), ('v', 1.0, 5.0, 0.8), ('v', 1.2, 5.0, 0.7)]
        gts = {'v': [(1.0, 5.0)]}
        assert average_precision(dets, gts, 0.5) == pytest.approx(1.0)
        assert average_precision(dets, {'v': [(1.0, 5.0), (30.0, 35.0)]}, 0.5) == \
            pytest.approx(0.5)

    def test_detection_in_other_video_is_false(self):
        assert average_precision([('w', 1.0, 5.0, 0.9)], {'v': [(1.0, 5.0)]}, 0.5) == 0.0

    def test_matches_oracle(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            gts = {}
            for vid in ('a', 'b', 'c'):
                starts = rng.uniform(1, 30, int(rng.integers(0, 4)))
                gts[vid] = [(s, s + rng.uniform(1, 8)) for s in starts]
            dets = []
            for _ in range(int(rng.integers(0, 10))):
                vid = str(rng.choice(['a', 'b', 'c']))
                s = rng.uniform(1, 30)
                dets.append((vid, s, s + rng.uniform(1, 8), float(rng.random())))
            for thresh in (0.3, 0.5, 0.7):
                expected = oracle_ap(dets, gts, thresh)
                got = average_precision(dets, gts, thresh)
                if expected is None:
                    assert got is None
                else:
                    assert got == pytest.approx(expected, abs=1e-12)

    def test_properties(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            gts = {'v': [(s, s + 5.0) for s in rng.uniform(1, 40, 3)]}
            dets = [('v', s, s + rng.uniform(2, 7), float(rng.random()))
                    for s in rng.uniform(1, 40, 8)]
            aps = [average_precision(dets, gts, t) for t in (0.1, 0.3, 0.5, 0.7, 0.9)]
            assert all(0.0 <= ap <= 1.0 for ap in aps)
            assert all(x >= y for x, y in zip(aps, aps[1:]))
            squashed = [(v, s, e, 1.0 / (1.0 + np.exp(-3.0 * score)))
                        for v, s, e, score in dets]
            assert average_precision(squashed, gts, 0.5) == average_precision(dets, gts, 0.5)


class TestEvalConfig:
    @pytest.mark.parametrize('grid', [(), (0.5, 0.3), (0.0, 0.5), (0.5, 1.2)])
    def test_invalid_grid(self, grid):
        with pytest.raises(ConfigurationError):
            EvalConfig(tiou_grid=grid)


class TestEvaluate:
    @pytest.fixture
    def videos(self):
        return [
            video('a', [ActionAnnotation(2.0, 8.0, 0), ActionAnnotation(12.0, 20.0, 2)]),
            video('b', [ActionAnnotation(5.0, 9.0, 1), ActionAnnotation(25.0, 33.0, 2)]),
        ]

    @staticmethod
    def perfect(videos, classes=None):
        return {
            v.video_id: [Detection(a.start, a.end, a.class_id, 0.9) for a in v.annotations
                         if classes is None or a.class_id in classes]
            for v in videos
        }

    def test_perfect_predictions(self, videos, tiny_vocab):
        cfg = EvalConfig(tiou_grid=(0.3, 0.5, 0.7))
        report = evaluate(self.perfect(videos), videos, tiny_vocab, cfg)
        assert (report.map_base, report.map_novel, report.map_all) == (1.0, 1.0, 1.0)

    def test_novel_only_predictions(self, videos, tiny_vocab):
        report = evaluate(self.perfect(videos, {2}), videos, tiny_vocab)
        assert report.map_novel == 1.0
        assert report.map_base == 0.0
        assert report.map_all == pytest.approx(1.0 / 3.0)

    def test_class_without_ground_truth_is_null(self, tiny_vocab):
        videos = [video('a', [ActionAnnotation(2.0, 8.0, 0)])]
        report = evaluate({'a': []}, videos, tiny_vocab)
        assert report.class_ap(1).ap_by_threshold == [None]
        assert report.map_novel is None
        assert report.map_base == 0.0

    def test_labels_flag_every_detection(self, videos, tiny_vocab):
        preds = self.perfect(videos)
        preds['a'].append(Detection(30.0, 35.0, 0, 0.1))
        report = evaluate(preds, videos, tiny_vocab, EvalConfig(tiou_grid=(0.5, 0.9)))
        assert len(report.labels) == 5
        assert sum(label.tp == (True, True) for label in report.labels) == 4
        assert sum(label.tp == (False, False) for label in report.labels) == 1

    def test_top_k_caps_each_video(self, videos, tiny_vocab):
        preds = self.perfect(videos)
        report = evaluate(preds, videos, tiny_vocab, EvalConfig(top_k=1))
        assert len(report.labels) == 2

    def test_threads_do_not_change_results(self, videos, tiny_vocab):
        preds = self.perfect(videos)
        preds['b'].append(Detection(1.0, 30.0, 1, 0.95))
        one = evaluate(preds, videos, tiny_vocab, threads=1)
        four = evaluate(preds, videos, tiny_vocab, threads=4)
        assert one.summary() == four.summary()

    def test_unknown_class(self, videos, tiny_vocab):
        with pytest.raises(DataError):
            evaluate({'a': [Detection(1.0, 2.0, 7, 0.5)]}, videos, tiny_vocab)

    def test_unknown_video(self, videos, tiny_vocab):
        with pytest.raises(DataError):
            evaluate({'zzz': []}, videos, tiny_vocab)


class TestReport:
    def test_round_trip(self, tiny_vocab, tmp_path):
        videos = [video('a', [ActionAnnotation(2.0, 8.0, 0), ActionAnnotation(12.0, 20.0, 2)])]
        preds = {'a': [Detection(2.0, 8.5, 0, 0.8), Detection(11.0, 19.0, 2, 0.4),
                       Detection(25.0, 30.0, 2, 0.6)]}
        report = evaluate(preds, videos, tiny_vocab, EvalConfig(tiou_grid=(0.3, 0.5, 0.7)))
        path = write_report(report, tmp_path / 'eval.json')
        back = read_report(path)
        assert back.summary() == report.summary()
        assert [c.ap_by_threshold for c in back.per_class] == \
            [c.ap_by_threshold for c in report.per_class]
        rows = table_path(path).read_text().splitlines()
        assert rows[0] == 'class_id\tsplit\tAP@0.3\tAP@0.5\tAP@0.7'
        assert len(rows) - 1 == sum(c.evaluable for c in report.per_class) == 2
        assert len(labels_path(path).read_text().splitlines()) == 1 + 3

    def test_empty_report(self, tmp_path):
        path = write_report(EvalReport(config=EvalConfig().to_dict()), tmp_path / 'e.json')
        payload = json.loads(path.read_text())
        assert payload['per_class'] == []
        assert payload['map_all'] is None
        assert read_report(path).per_class == []

    def test_malformed(self, tmp_path):
        path = tmp_path / 'e.json'
        path.write_text('{"per_class": []}')
        with pytest.raises(FormatError, match='malformed'):
            read_report(path)

    def test_average_reports(self):
        reports = [EvalReport({}, map_base=0.5, map_novel=0.2, map_all=0.4),
                   EvalReport({}, map_base=0.7, map_novel=None, map_all=0.6)]
        summary = average_reports(reports)
        assert summary['reports'] == 2
        assert summary['map_base'] == pytest.approx(0.6)
        assert summary['map_novel'] == pytest.approx(0.2)
        assert summary['map_all'] == pytest.approx(0.5)
