"""Dense tensors with tape-based reverse-mode differentiation."""

from .tensor import Tensor, ComputationTape, as_tensor, backward, current_tape
from .gradcheck import grad_check, analytic_gradient, numeric_gradient
from . import ops

__all__ = [
    'Tensor',
    'ComputationTape',
    'as_tensor',
    'backward',
    'current_tape',
    'grad_check',
    'analytic_gradient',
    'numeric_gradient',
    'ops'
]
