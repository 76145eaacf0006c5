"""
Differentiable operations.

Each operation computes its forward value with numpy and registers a backward
closure on the active tape. Broadcasting is limited to what numpy does for
elementwise operands; gradients are summed back to each operand's shape.
"""

from typing import List, Optional, Sequence, Union

import numpy as np

from ..core.exceptions import ConfigurationError, DimensionError, NumericError
from .tensor import Tensor, as_tensor, make_result

Operand = Union[Tensor, float, int, np.ndarray]


def _unbroadcast(grad: np.ndarray, shape) -> np.ndarray:
    """Sum a broadcast gradient back down to the operand's shape."""
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _check_broadcast(op: str, a: Tensor, b: Tensor) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise DimensionError(op, a.shape, b.shape)


# Elementwise arithmetic

def add(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast('add', a, b)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return make_result(a.data + b.data, (a, b), backward)


def sub(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast('sub', a, b)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return make_result(a.data - b.data, (a, b), backward)


def mul(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast('mul', a, b)

    def backward(g):
        return (_unbroadcast(g * b.data, a.shape),
                _unbroadcast(g * a.data, b.shape))

    return make_result(a.data * b.data, (a, b), backward)


def div(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast('div', a, b)
    out = a.data / b.data

    def backward(g):
        return (_unbroadcast(g / b.data, a.shape),
                _unbroadcast(-g * out / b.data, b.shape))

    return make_result(out, (a, b), backward)


def power(a: Tensor, exponent: float) -> Tensor:
    """Elementwise a**exponent for a constant exponent."""
    out = a.data ** exponent

    def backward(g):
        return (g * exponent * a.data ** (exponent - 1.0),)

    return make_result(out, (a,), backward)


def square(a: Tensor) -> Tensor:
    def backward(g):
        return (2.0 * g * a.data,)

    return make_result(a.data * a.data, (a,), backward)


def minimum(a: Operand, b: Operand) -> Tensor:
    """Elementwise minimum; ties route the gradient to ``a``."""
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast('minimum', a, b)
    pick_a = a.data <= b.data

    def backward(g):
        return (_unbroadcast(np.where(pick_a, g, 0.0), a.shape),
                _unbroadcast(np.where(pick_a, 0.0, g), b.shape))

    return make_result(np.where(pick_a, a.data, b.data), (a, b), backward)


def maximum(a: Operand, b: Operand) -> Tensor:
    """Elementwise maximum; ties route the gradient to ``a``."""
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast('maximum', a, b)
    pick_a = a.data >= b.data

    def backward(g):
        return (_unbroadcast(np.where(pick_a, g, 0.0), a.shape),
                _unbroadcast(np.where(pick_a, 0.0, g), b.shape))

    return make_result(np.where(pick_a, a.data, b.data), (a, b), backward)


# Nonlinearities

def relu(x: Tensor) -> Tensor:
    active = x.data > 0

    def backward(g):
        return (g * active,)

    return make_result(np.where(active, x.data, 0.0), (x,), backward)


def stable_sigmoid(z: np.ndarray) -> np.ndarray:
    """Overflow-free logistic function on raw arrays."""
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def stable_softplus(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


def sigmoid(x: Tensor) -> Tensor:
    out = stable_sigmoid(x.data)

    def backward(g):
        return (g * out * (1.0 - out),)

    return make_result(out, (x,), backward)


def softplus(x: Tensor) -> Tensor:
    def backward(g):
        return (g * stable_sigmoid(x.data),)

    return make_result(stable_softplus(x.data), (x,), backward)


def log_sigmoid(x: Tensor) -> Tensor:
    """log(sigmoid(x)) computed as -softplus(-x)."""
    def backward(g):
        return (g * stable_sigmoid(-x.data),)

    return make_result(-stable_softplus(-x.data), (x,), backward)


def exp(x: Tensor) -> Tensor:
    out = np.exp(x.data)

    def backward(g):
        return (g * out,)

    return make_result(out, (x,), backward)


def log(x: Tensor) -> Tensor:
    def backward(g):
        return (g / x.data,)

    return make_result(np.log(x.data), (x,), backward)


# Reductions and reshaping

def sum(x: Tensor, axis: Optional[int] = None) -> Tensor:  # noqa: A001
    out = x.data.sum(axis=axis)

    def backward(g):
        if axis is None:
            return (np.broadcast_to(g, x.shape).copy(),)
        return (np.broadcast_to(np.expand_dims(g, axis), x.shape).copy(),)

    return make_result(np.asarray(out, dtype=np.float64), (x,), backward)


def mean(x: Tensor) -> Tensor:
    n = max(1, x.size)

    def backward(g):
        return (np.full(x.shape, float(g) / n),)

    return make_result(np.asarray(x.data.sum() / n), (x,), backward)


def transpose(x: Tensor) -> Tensor:
    def backward(g):
        return (g.T,)

    return make_result(x.data.T.copy(), (x,), backward)


def slice_cols(x: Tensor, start: int, stop: int) -> Tensor:
    def backward(g):
        full = np.zeros_like(x.data)
        full[:, start:stop] = g
        return (full,)

    return make_result(x.data[:, start:stop].copy(), (x,), backward)


def concat_cols(parts: Sequence[Tensor]) -> Tensor:
    parts = tuple(parts)
    bounds = np.cumsum([0] + [p.shape[1] for p in parts])

    def backward(g):
        return tuple(g[:, bounds[i]:bounds[i + 1]] for i in range(len(parts)))

    return make_result(np.concatenate([p.data for p in parts], axis=1), parts, backward)


def concat_rows(parts: Sequence[Tensor]) -> Tensor:
    parts = tuple(parts)
    bounds = np.cumsum([0] + [p.shape[0] for p in parts])

    def backward(g):
        return tuple(g[bounds[i]:bounds[i + 1]] for i in range(len(parts)))

    return make_result(np.concatenate([p.data for p in parts], axis=0), parts, backward)


def take_rows(x: Tensor, index: np.ndarray) -> Tensor:
    index = np.asarray(index, dtype=np.int64)

    def backward(g):
        full = np.zeros_like(x.data)
        np.add.at(full, index, g)
        return (full,)

    return make_result(x.data[index].copy(), (x,), backward)


def reshape(x: Tensor, shape) -> Tensor:
    def backward(g):
        return (g.reshape(x.shape),)

    return make_result(x.data.reshape(shape).copy(), (x,), backward)


# Linear algebra

def matmul(a: Tensor, b: Tensor) -> Tensor:
    """
    Matrix product of a (m x k) and b (k x n).

    Raises:
        DimensionError: If operands are not 2-D or inner extents differ
    """
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError('matmul', a.shape, b.shape)

    def backward(g):
        return g @ b.data.T, a.data.T @ g

    return make_result(a.data @ b.data, (a, b), backward)


def softmax_rows(x: Tensor, key_mask: Optional[np.ndarray] = None) -> Tensor:
    """
    Row-wise softmax, stabilized by subtracting each row's maximum.

    Args:
        x: Logits (m x n), n >= 1
        key_mask: Optional boolean (n,) or (m x n); False entries get zero mass

    Raises:
        NumericError: If x contains non-finite values
    """
    if not np.all(np.isfinite(x.data)):
        raise NumericError('softmax_rows input')
    z = x.data
    if key_mask is not None:
        allowed = np.broadcast_to(np.asarray(key_mask, dtype=bool), z.shape)
        z = np.where(allowed, z, -np.inf)
    row_max = np.max(z, axis=1, keepdims=True)
    row_max = np.where(np.isfinite(row_max), row_max, 0.0)
    e = np.exp(z - row_max)
    total = e.sum(axis=1, keepdims=True)
    out = np.divide(e, total, out=np.zeros_like(e), where=total > 0)

    def backward(g):
        inner = (g * out).sum(axis=1, keepdims=True)
        return (out * (g - inner),)

    return make_result(out, (x,), backward)


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float) -> Tensor:
    """
    Per-row normalization to zero mean and unit variance, then affine.

    Args:
        x: Input (m x n)
        gain: Scale (n,)
        bias: Shift (n,)
        eps: Variance guard, must be positive
    """
    if eps <= 0:
        raise ConfigurationError('eps must be positive', key='eps')
    if gain.shape != (x.shape[1],) or bias.shape != (x.shape[1],):
        raise DimensionError('layer_norm', x.shape, gain.shape)
    mu = x.data.mean(axis=1, keepdims=True)
    centered = x.data - mu
    var = (centered * centered).mean(axis=1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    x_hat = centered * inv_std
    n = x.shape[1]

    def backward(g):
        d_gain = (g * x_hat).sum(axis=0)
        d_bias = g.sum(axis=0)
        gx = g * gain.data
        d_x = inv_std * (gx - gx.mean(axis=1, keepdims=True)
                         - x_hat * (gx * x_hat).sum(axis=1, keepdims=True) / n)
        return d_x, d_gain, d_bias

    return make_result(x_hat * gain.data + bias.data, (x, gain, bias), backward)


def normalize_rows(x: Tensor, eps: float = 1e-12) -> Tensor:
    """Scale each row to unit L2 norm (rows of norm below eps stay near zero)."""
    norm = np.sqrt((x.data * x.data).sum(axis=1, keepdims=True))
    safe = np.maximum(norm, eps)
    out = x.data / safe
    clipped = norm < eps

    def backward(g):
        radial = (g * out).sum(axis=1, keepdims=True)
        d_x = (g - np.where(clipped, 0.0, out * radial)) / safe
        return (d_x,)

    return make_result(out, (x,), backward)


# Convolutions

def _conv_geometry(T: int, k: int, stride: int, padding: str):
    if stride < 1:
        raise ConfigurationError('stride must be a positive integer', key='stride')
    if padding == 'same':
        if k % 2 == 0:
            raise ConfigurationError(
                f'kernel size {k} must be odd for "same" padding', key='kernel'
            )
        pad = (k - 1) // 2
        out_len = -(-T // stride)
    elif padding == 'valid':
        pad = 0
        if T < k:
            raise DimensionError('conv1d', (T,), (k,))
        out_len = (T - k) // stride + 1
    else:
        raise ConfigurationError(f'unknown padding {padding!r}', key='padding')
    return pad, out_len


def _windows(xp: np.ndarray, k: int, stride: int, out_len: int) -> np.ndarray:
    """Stack the k strided views of the padded input: (k, out_len, C)."""
    span = stride * (out_len - 1) + 1
    return np.stack([xp[j:j + span:stride] for j in range(k)])


def _scatter_windows(d_cols: np.ndarray, padded_len: int, stride: int) -> np.ndarray:
    k, out_len, channels = d_cols.shape
    span = stride * (out_len - 1) + 1
    d_xp = np.zeros((padded_len, channels))
    for j in range(k):
        d_xp[j:j + span:stride] += d_cols[j]
    return d_xp


def conv1d(x: Tensor, kernel: Tensor, stride: int = 1,
           padding: str = 'same') -> Tensor:
    """
    Temporal convolution of x (T x C_in) with kernel (k x C_in x C_out).

    Output length is ceil(T / stride) for "same" padding; output position i is
    centered on input position i * stride.
    """
    if kernel.data.ndim != 3 or x.data.ndim != 2 or kernel.shape[1] != x.shape[1]:
        raise DimensionError('conv1d', x.shape, kernel.shape)
    T = x.shape[0]
    k = kernel.shape[0]
    pad, out_len = _conv_geometry(T, k, stride, padding)
    xp = np.pad(x.data, ((pad, pad), (0, 0)))
    cols = _windows(xp, k, stride, out_len)
    out = np.einsum('ktc,kcd->td', cols, kernel.data)

    def backward(g):
        d_kernel = np.einsum('ktc,td->kcd', cols, g)
        d_cols = np.einsum('td,kcd->ktc', g, kernel.data)
        d_xp = _scatter_windows(d_cols, xp.shape[0], stride)
        return d_xp[pad:pad + T], d_kernel

    return make_result(out, (x, kernel), backward)


def depthwise_conv1d(x: Tensor, kernel: Tensor, stride: int = 1) -> Tensor:
    """Per-channel "same" convolution of x (T x C) with kernel (k x C)."""
    if kernel.data.ndim != 2 or x.data.ndim != 2 or kernel.shape[1] != x.shape[1]:
        raise DimensionError('depthwise_conv1d', x.shape, kernel.shape)
    T = x.shape[0]
    k = kernel.shape[0]
    pad, out_len = _conv_geometry(T, k, stride, 'same')
    xp = np.pad(x.data, ((pad, pad), (0, 0)))
    cols = _windows(xp, k, stride, out_len)
    out = np.einsum('ktc,kc->tc', cols, kernel.data)

    def backward(g):
        d_kernel = np.einsum('ktc,tc->kc', cols, g)
        d_cols = g[None, :, :] * kernel.data[:, None, :]
        d_xp = _scatter_windows(d_cols, xp.shape[0], stride)
        return d_xp[pad:pad + T], d_kernel

    return make_result(out, (x, kernel), backward)


def stack_scalars(values: List[Tensor]) -> Tensor:
    """Concatenate scalar tensors into a vector."""
    return concat_rows([reshape(v, (1,)) for v in values])
