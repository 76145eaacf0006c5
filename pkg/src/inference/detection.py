"""
Scored temporal detections.
"""

from dataclasses import dataclass, replace

from ..core.exceptions import DataError


@dataclass(frozen=True)
class Detection:
    """
    One predicted action instance in 1-based grid coordinates.

    Attributes:
        start: Segment start
        end: Segment end (> start)
        class_id: Original vocabulary id
        score: Sigmoid of the class logit
    """
    start: float
    end: float
    class_id: int
    score: float

    def __post_init__(self):
        if not self.start < self.end:
            raise DataError(f'detection [{self.start}, {self.end}] is degenerate')

    def shifted(self, offset: float) -> 'Detection':
        return replace(self, start=self.start + offset, end=self.end + offset)

    def to_dict(self) -> dict:
        return {'start': self.start, 'end': self.end,
                'class_id': self.class_id, 'score': self.score}


def ranking_key(det: Detection):
    """Descending score; ties by smaller start, then smaller class id."""
    return (-det.score, det.start, det.class_id)
