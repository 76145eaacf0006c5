"""
Training reports: a tab-separated per-epoch loss log and a JSON summary.
Wall time is kept on the report object and in logs only, never in files.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

from ..core.exceptions import FormatError

PathLike = Union[str, Path]

LOG_HEADER = 'epoch\tL_cls\tL_reg\ttotal'


@dataclass(frozen=True)
class EpochLoss:
    cls: float
    reg: float
    total: float


@dataclass
class TrainReport:
    """
    Attributes:
        stage: "one" or "two"
        seed: Training seed
        losses: Mean (L_cls, L_reg, total) of every epoch, in order
        wall_time: Seconds spent in the training loop
        checkpoint: Best-by-loss checkpoint path, when one was written
        best_epoch: 1-based epoch of the returned parameters (0 = initial)
        config: Echo of the training and model configuration
    """
    stage: str
    seed: int
    losses: List[EpochLoss] = field(default_factory=list)
    wall_time: float = 0.0
    checkpoint: Optional[str] = None
    best_epoch: int = 0
    config: dict = field(default_factory=dict)

    @property
    def totals(self) -> List[float]:
        return [loss.total for loss in self.losses]

    def summary(self) -> dict:
        return {
            'stage': self.stage,
            'seed': self.seed,
            'epochs': len(self.losses),
            'best_epoch': self.best_epoch,
            'checkpoint': self.checkpoint,
            'losses': [[e.cls, e.reg, e.total] for e in self.losses],
            'config': self.config,
        }


def write_train_log(report: TrainReport, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [LOG_HEADER]
    for epoch, loss in enumerate(report.losses, start=1):
        lines.append(f'{epoch}\t{loss.cls!r}\t{loss.reg!r}\t{loss.total!r}')
    path.write_text('\n'.join(lines) + '\n', encoding='utf-8')
    return path


def read_train_log(path: PathLike) -> List[EpochLoss]:
    lines = Path(path).read_text(encoding='utf-8').splitlines()
    if not lines or lines[0] != LOG_HEADER:
        raise FormatError(str(path), 'missing training log header')
    losses = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split('\t')
        try:
            _, cls, reg, total = parts
            losses.append(EpochLoss(float(cls), float(reg), float(total)))
        except ValueError:
            raise FormatError(str(path), f'line {lineno}: expected 4 tab-separated fields')
    return losses


def write_train_summary(report: TrainReport, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report.summary(), indent=2, sort_keys=True) + '\n',
                    encoding='utf-8')
    return path
