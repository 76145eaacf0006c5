"""Average precision and split-wise mAP reports."""

from .average_precision import ap_from_pr, rank_detections, match_detections, average_precision
from .evaluator import EvalConfig, ClassAP, DetectionLabel, EvalReport, split_map, evaluate
from .report import write_report, read_report, average_reports, table_path, labels_path

__all__ = [
    'ap_from_pr',
    'rank_detections',
    'match_detections',
    'average_precision',
    'EvalConfig',
    'ClassAP',
    'DetectionLabel',
    'EvalReport',
    'split_map',
    'evaluate',
    'write_report',
    'read_report',
    'average_reports',
    'table_path',
    'labels_path'
]
