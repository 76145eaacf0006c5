"""
Named model parameters.

Names are dotted paths; everything under "enc." belongs to the encoder and
everything under "dec." to the decoder heads. Values are kept representable
in float32 so a checkpoint (float32 payload) reproduces them exactly.
"""

import logging
import math
from collections import OrderedDict
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from config.settings import DOWNSAMPLE_KERNEL, PRIOR_PROB
from ..core.constants import DECODER_PREFIX, ENCODER_PREFIX
from ..core.exceptions import CheckpointMismatchError, UsageError
from ..core.seeding import derive_rng
from ..tensor import Tensor
from .config import ModelConfig

logger = logging.getLogger(__name__)


def to_storage(array: np.ndarray) -> np.ndarray:
    """Round to the nearest float32 value, returned as float64."""
    return np.asarray(array, dtype=np.float32).astype(np.float64)


class ModelParams:
    """
    Ordered mapping of parameter name to leaf tensor.

    Args:
        tensors: name -> Tensor; all are marked requires_grad
    """

    def __init__(self, tensors: Dict[str, Tensor]):
        self._tensors: 'OrderedDict[str, Tensor]' = OrderedDict()
        for name, tensor in tensors.items():
            tensor.requires_grad = True
            tensor.name = name
            self._tensors[name] = tensor

    def __getitem__(self, name: str) -> Tensor:
        try:
            return self._tensors[name]
        except KeyError:
            raise UsageError(f'unknown parameter {name!r}')

    def __contains__(self, name: str) -> bool:
        return name in self._tensors

    def __iter__(self) -> Iterator[str]:
        return iter(self._tensors)

    def __len__(self) -> int:
        return len(self._tensors)

    def items(self):
        return self._tensors.items()

    @property
    def names(self) -> List[str]:
        return list(self._tensors)

    def encoder_names(self) -> List[str]:
        return [n for n in self._tensors if n.startswith(ENCODER_PREFIX)]

    def decoder_names(self) -> List[str]:
        return [n for n in self._tensors if n.startswith(DECODER_PREFIX)]

    def shapes(self) -> Dict[str, Tuple[int, ...]]:
        return {n: t.shape for n, t in self._tensors.items()}

    def num_parameters(self) -> int:
        return int(sum(t.size for t in self._tensors.values()))

    def zero_grad(self) -> None:
        for tensor in self._tensors.values():
            tensor.zero_grad()

    def clone(self) -> 'ModelParams':
        """Deep copy of values; gradients are not copied."""
        return ModelParams(OrderedDict(
            (n, Tensor(t.data.copy())) for n, t in self._tensors.items()
        ))

    def round_to_storage(self) -> None:
        for tensor in self._tensors.values():
            tensor.data = to_storage(tensor.data)

    def equals(self, other: 'ModelParams', names: Optional[List[str]] = None) -> bool:
        """Bitwise equality over the given (default: all) parameters."""
        names = self.names if names is None else names
        if set(self.names) != set(other.names):
            return False
        return all(np.array_equal(self[n].data, other[n].data) for n in names)

    def check_shapes(self, expected: Dict[str, Tuple[int, ...]]) -> None:
        """
        Raises:
            CheckpointMismatchError: Listing every missing, extra or reshaped tensor
        """
        found = self.shapes()
        problems = []
        for name, shape in expected.items():
            if name not in found:
                problems.append(f'{name}: missing')
            elif tuple(found[name]) != tuple(shape):
                problems.append(f'{name}: expected {tuple(shape)}, found {tuple(found[name])}')
        for name in found:
            if name not in expected:
                problems.append(f'{name}: unexpected')
        if problems:
            raise CheckpointMismatchError(problems)


def _uniform(seed: int, name: str, shape: Tuple[int, ...], fan_in: int) -> np.ndarray:
    bound = 1.0 / math.sqrt(fan_in)
    return derive_rng(seed, 'init', name).uniform(-bound, bound, size=shape)


def parameter_shapes(cfg: ModelConfig) -> Dict[str, Tuple[int, ...]]:
    """Every parameter name and shape implied by a configuration."""
    D, s, k = cfg.dim, cfg.text_dim, cfg.head_kernel
    hidden = cfg.ffn_mult * D
    shapes: 'OrderedDict[str, Tuple[int, ...]]' = OrderedDict()
    for stream, width in (('v', cfg.d_v), ('f', cfg.d_f)):
        shapes[f'enc.proj_{stream}.0.weight'] = (1, width, D)
        shapes[f'enc.proj_{stream}.0.bias'] = (D,)
        shapes[f'enc.proj_{stream}.1.weight'] = (1, D, D)
        shapes[f'enc.proj_{stream}.1.bias'] = (D,)
    for m in range(1, cfg.levels + 1):
        prefix = f'enc.level{m}'
        if m > 1:
            for stream in ('v', 'f'):
                shapes[f'{prefix}.down_{stream}.depthwise'] = (DOWNSAMPLE_KERNEL, D)
                shapes[f'{prefix}.down_{stream}.pointwise'] = (1, D, D)
                shapes[f'{prefix}.down_{stream}.bias'] = (D,)
        shapes[f'{prefix}.sa_norm.gain'] = (D,)
        shapes[f'{prefix}.sa_norm.bias'] = (D,)
        for w in ('w_q', 'w_k', 'w_v', 'w_o'):
            shapes[f'{prefix}.sa.{w}'] = (D, D)
        if not cfg.late_fusion_only:
            shapes[f'{prefix}.ca_norm.gain'] = (D,)
            shapes[f'{prefix}.ca_norm.bias'] = (D,)
            shapes[f'{prefix}.ca.w_q'] = (D, D)
            shapes[f'{prefix}.ca.w_k'] = (s, D)
            shapes[f'{prefix}.ca.w_v'] = (s, D)
            shapes[f'{prefix}.ca.w_o'] = (D, D)
        shapes[f'{prefix}.ffn_norm.gain'] = (D,)
        shapes[f'{prefix}.ffn_norm.bias'] = (D,)
        shapes[f'{prefix}.ffn.w1'] = (D, hidden)
        shapes[f'{prefix}.ffn.b1'] = (hidden,)
        shapes[f'{prefix}.ffn.w2'] = (hidden, D)
        shapes[f'{prefix}.ffn.b2'] = (D,)
    for head in ('cls', 'reg'):
        for i in range(cfg.head_layers):
            shapes[f'dec.{head}.conv{i}.weight'] = (k, D, D)
            shapes[f'dec.{head}.conv{i}.bias'] = (D,)
    shapes['dec.cls.out.weight'] = (k, D, D)
    shapes['dec.cls.out.bias'] = (D,)
    shapes['dec.cls.text_proj'] = (s, D)
    shapes['dec.cls.tau'] = (1,)
    shapes['dec.cls.bias'] = (1,)
    shapes['dec.reg.out.weight'] = (k, D, 2)
    shapes['dec.reg.out.bias'] = (2,)
    return shapes


def _initial_value(name: str, shape: Tuple[int, ...], cfg: ModelConfig,
                   seed: int) -> np.ndarray:
    if name.endswith('.gain'):
        return np.ones(shape)
    if name == 'dec.cls.tau':
        return np.full(shape, cfg.temperature)
    if name == 'dec.cls.bias':
        # Rare initial positives keep the focal loss stable
        return np.full(shape, -math.log((1.0 - PRIOR_PROB) / PRIOR_PROB))
    if name.endswith('.bias') or name.endswith('.b1') or name.endswith('.b2'):
        return np.zeros(shape)
    # Conv kernels are k x C_in x C_out; depthwise kernels and matrices use rows
    fan_in = shape[0] * shape[1] if len(shape) == 3 else shape[0]
    return _uniform(seed, name, shape, fan_in)


def init_params(cfg: ModelConfig, seed: int = 0) -> ModelParams:
    """
    Draw initial parameters.

    Weights use a fan-in scaled uniform init, each tensor from its own
    (seed, name) stream so the values do not depend on creation order.

    Args:
        cfg: Model configuration
        seed: Init seed

    Returns:
        Float32-representable parameters
    """
    tensors = OrderedDict(
        (name, Tensor(to_storage(_initial_value(name, shape, cfg, seed))))
        for name, shape in parameter_shapes(cfg).items()
    )
    params = ModelParams(tensors)
    logger.debug('initialized %d tensors (%d values)', len(params), params.num_parameters())
    return params
