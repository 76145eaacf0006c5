"""
EvalReport files: a JSON summary, a per-class table and per-detection labels.
"""

import json
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from ..core.exceptions import FormatError
from .evaluator import ClassAP, EvalReport

PathLike = Union[str, Path]


def _fmt(value: Optional[float]) -> str:
    return 'null' if value is None else repr(value)


def table_path(path: PathLike) -> Path:
    path = Path(path)
    return path.with_name(path.stem + '_classes.tsv')


def labels_path(path: PathLike) -> Path:
    path = Path(path)
    return path.with_name(path.stem + '_labels.tsv')


def write_report(report: EvalReport, path: PathLike) -> Path:
    """
    Write the JSON summary at path plus two UTF-8 tables next to it.

    The class table lists evaluable classes sorted by id; the label table
    has one row per scored detection.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        'config_echo': report.config,
        'per_class': [
            {'class_id': c.class_id, 'split': c.split, 'ap_by_threshold': c.ap_by_threshold}
            for c in sorted(report.per_class, key=lambda c: c.class_id)
        ],
        'map_base': report.map_base,
        'map_novel': report.map_novel,
        'map_all': report.map_all,
    }
    path.write_text(json.dumps(payload, indent=2) + '\n', encoding='utf-8')

    grid = report.config.get('tiou_grid', [])
    header = 'class_id\tsplit\t' + '\t'.join(f'AP@{t:g}' for t in grid)
    rows = [header]
    for c in sorted(report.per_class, key=lambda c: c.class_id):
        if c.evaluable:
            rows.append(f'{c.class_id}\t{c.split}\t'
                        + '\t'.join(_fmt(ap) for ap in c.ap_by_threshold))
    table_path(path).write_text('\n'.join(rows) + '\n', encoding='utf-8')

    label_rows = ['video_id\tclass_id\tstart\tend\tscore\t'
                  + '\t'.join(f'tp@{t:g}' for t in grid)]
    for label in report.labels:
        label_rows.append(
            f'{label.video_id}\t{label.class_id}\t{label.start!r}\t{label.end!r}\t'
            f'{label.score!r}\t' + '\t'.join('TP' if f else 'FP' for f in label.tp)
        )
    labels_path(path).write_text('\n'.join(label_rows) + '\n', encoding='utf-8')
    return path


def read_report(path: PathLike) -> EvalReport:
    """
    Parse a JSON summary back into an EvalReport (labels are not restored).

    Raises:
        FormatError: On unreadable or malformed files
    """
    try:
        payload = json.loads(Path(path).read_text(encoding='utf-8'))
    except OSError as e:
        raise FormatError(str(path), f'cannot read file ({e.strerror})')
    except ValueError as e:
        raise FormatError(str(path), f'invalid JSON ({e})')
    try:
        per_class = [
            ClassAP(int(c['class_id']), str(c['split']),
                    [None if ap is None else float(ap) for ap in c['ap_by_threshold']])
            for c in payload['per_class']
        ]
        return EvalReport(
            config=dict(payload['config_echo']),
            per_class=per_class,
            map_base=payload['map_base'],
            map_novel=payload['map_novel'],
            map_all=payload['map_all'],
        )
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(str(path), f'malformed report ({e})')


def average_reports(reports: Sequence[EvalReport]) -> Dict[str, Optional[float]]:
    """
    Mean of each split mAP over several random-split reports.

    Reports where a split is undefined are left out of that split's mean.
    """
    summary: Dict[str, Optional[float]] = {'reports': len(reports)}
    for key in ('map_base', 'map_novel', 'map_all'):
        values: List[float] = [getattr(r, key) for r in reports if getattr(r, key) is not None]
        summary[key] = float(np.mean(values)) if values else None
    return summary
