"""
Dense float64 tensors and the computation tape.

A tape records every differentiable operation executed while it is active.
Replaying it backward visits the records in exact reverse order and
accumulates gradients additively, so a tensor used twice receives the sum
of both contributions.
"""

import threading
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.exceptions import NumericError, UsageError

ArrayLike = Union[float, int, Sequence, np.ndarray]
BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_active = threading.local()


class Tensor:
    """
    Row-major float64 array with an optional gradient buffer.

    Tensors are immutable after construction; only ``grad`` changes, and only
    on leaves (tensors not produced by a recorded operation).
    """

    __slots__ = ('data', 'requires_grad', 'grad', 'name')

    def __init__(self, data: ArrayLike, requires_grad: bool = False,
                 name: Optional[str] = None):
        self.data = np.array(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self.name = name

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float('nan')

    def zero_grad(self) -> None:
        self.grad = None

    def accumulate_grad(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def detach(self) -> 'Tensor':
        return Tensor(self.data.copy())

    def __repr__(self) -> str:
        label = f' {self.name}' if self.name else ''
        return f'<Tensor{label} shape={self.shape} requires_grad={self.requires_grad}>'

    # Arithmetic sugar; the implementations live in ops
    def __add__(self, other):
        from . import ops
        return ops.add(self, other)

    def __radd__(self, other):
        from . import ops
        return ops.add(other, self)

    def __sub__(self, other):
        from . import ops
        return ops.sub(self, other)

    def __rsub__(self, other):
        from . import ops
        return ops.sub(other, self)

    def __mul__(self, other):
        from . import ops
        return ops.mul(self, other)

    def __rmul__(self, other):
        from . import ops
        return ops.mul(other, self)

    def __truediv__(self, other):
        from . import ops
        return ops.div(self, other)

    def __neg__(self):
        from . import ops
        return ops.mul(self, -1.0)

    def __matmul__(self, other):
        from . import ops
        return ops.matmul(self, other)


def as_tensor(value: Union['Tensor', ArrayLike]) -> Tensor:
    """Wrap constants; tensors pass through unchanged."""
    return value if isinstance(value, Tensor) else Tensor(value)


class _Record:
    __slots__ = ('output', 'inputs', 'backward')

    def __init__(self, output: Tensor, inputs: Tuple[Tensor, ...],
                 backward: BackwardFn):
        self.output = output
        self.inputs = inputs
        self.backward = backward


class ComputationTape:
    """
    Ordered record of executed differentiable operations.

    Use as a context manager; operations executed inside the ``with`` block on
    the same thread are recorded. Tapes are single-threaded, but separate
    threads may each run their own tape.
    """

    def __init__(self):
        self._records: List[_Record] = []
        self._previous: Optional['ComputationTape'] = None

    def __enter__(self) -> 'ComputationTape':
        self._previous = current_tape()
        _active.tape = self
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        _active.tape = self._previous
        self._previous = None

    def __len__(self) -> int:
        return len(self._records)

    def record(self, output: Tensor, inputs: Tuple[Tensor, ...],
               backward: BackwardFn) -> None:
        self._records.append(_Record(output, inputs, backward))

    def backward(self, loss: Tensor) -> None:
        """
        Replay the tape in reverse and populate leaf gradients.

        Args:
            loss: Scalar tensor produced on this tape

        Raises:
            UsageError: If loss is not a scalar
            NumericError: If a gradient becomes non-finite
        """
        if loss.size != 1:
            raise UsageError(f'backward needs a scalar loss, got shape {loss.shape}')
        produced = {id(r.output) for r in self._records}
        grads = {id(loss): np.ones_like(loss.data)}
        leaves = {}
        for record in reversed(self._records):
            g = grads.pop(id(record.output), None)
            if g is None:
                continue
            input_grads = record.backward(g)
            for tensor, ig in zip(record.inputs, input_grads):
                if ig is None or not tensor.requires_grad:
                    continue
                key = id(tensor)
                if key in grads:
                    grads[key] = grads[key] + ig
                else:
                    grads[key] = ig
                if key not in produced:
                    leaves[key] = tensor
        if id(loss) not in produced and loss.requires_grad:
            leaves[id(loss)] = loss
        for key, tensor in leaves.items():
            g = grads.get(key)
            if g is None:
                continue
            if not np.all(np.isfinite(g)):
                raise NumericError(tensor.name or 'gradient', 'non-finite gradient')
            tensor.accumulate_grad(g)


def current_tape() -> Optional[ComputationTape]:
    return getattr(_active, 'tape', None)


def backward(loss: Tensor, tape: ComputationTape) -> None:
    """Populate gradients on every requires_grad leaf reachable from loss."""
    tape.backward(loss)


def make_result(data: np.ndarray, inputs: Tuple[Tensor, ...],
                backward_fn: BackwardFn) -> Tensor:
    """
    Build an operation output and record it when a tape is active.

    Args:
        data: Forward value
        inputs: Operands in the order backward_fn returns their gradients
        backward_fn: Maps the output gradient to one gradient per input
    """
    tape = current_tape()
    needs_grad = tape is not None and any(t.requires_grad for t in inputs)
    out = Tensor.__new__(Tensor)
    out.data = data
    out.requires_grad = needs_grad
    out.grad = None
    out.name = None
    if needs_grad:
        tape.record(out, inputs, backward_fn)
    return out
