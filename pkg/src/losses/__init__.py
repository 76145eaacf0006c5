"""Target assignment and the focal + DIoU joint loss."""

from .assignment import (
    LevelTargets,
    TargetAssignment,
    assign_targets,
    default_level_ranges,
    grid_positions
)
from .focal import focal_loss, focal_loss_elements
from .diou import diou_loss, segment_diou_loss
from .joint import LossBreakdown, joint_loss

__all__ = [
    'LevelTargets',
    'TargetAssignment',
    'assign_targets',
    'default_level_ranges',
    'grid_positions',
    'focal_loss',
    'focal_loss_elements',
    'diou_loss',
    'segment_diou_loss',
    'LossBreakdown',
    'joint_loss'
]
