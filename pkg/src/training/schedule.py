"""
Learning-rate schedule: linear warmup, then cosine decay to min_lr_ratio * lr.
"""

import math


def lr_at(step: int, total_steps: int, warmup_steps: int, base_lr: float,
          min_lr_ratio: float = 0.0) -> float:
    """
    Learning rate for a 0-based optimizer step.

    Args:
        step: Current step
        total_steps: Steps in the whole run
        warmup_steps: Steps of linear warmup
        base_lr: Peak learning rate
        min_lr_ratio: Floor of the cosine decay relative to base_lr

    Returns:
        Learning rate (never negative)
    """
    min_lr = base_lr * min_lr_ratio
    if step < warmup_steps:
        return base_lr * (step + 1) / warmup_steps
    progress = (step - warmup_steps) / max(1, total_steps - warmup_steps)
    progress = min(1.0, max(0.0, progress))
    cosine = 0.5 * (1.0 + math.cos(math.pi * progress))
    return min_lr + (base_lr - min_lr) * cosine
