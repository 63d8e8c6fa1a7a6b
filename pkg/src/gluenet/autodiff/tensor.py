"""
Dense tensor type for the GlueNet autodiff core.

A Tensor wraps a numpy array of rank 0-3 (scalars only appear as losses).
Precision and the non-finite debug check are thread-local switches so that
independent forward/backward passes can run on separate threads.
"""
from __future__ import annotations

import threading
from contextlib import contextmanager
from typing import Iterator, Optional, Union

import numpy as np

from gluenet.common.config import get_config
from gluenet.common.errors import DimensionError

MAX_RANK = 3

_local = threading.local()

ArrayLike = Union["Tensor", np.ndarray, float, int, list]


def default_dtype() -> np.dtype:
    """Compute dtype for new tensors on this thread."""
    dtype = getattr(_local, "dtype", None)
    if dtype is None:
        dtype = np.dtype(get_config().get_dtype())
    return dtype


@contextmanager
def precision(dtype) -> Iterator[np.dtype]:
    """Temporarily switch the default dtype, e.g. to float64 for gradient checks."""
    previous = getattr(_local, "dtype", None)
    _local.dtype = np.dtype(dtype)
    try:
        yield _local.dtype
    finally:
        _local.dtype = previous


def debug_checks_enabled() -> bool:
    enabled = getattr(_local, "debug", None)
    if enabled is None:
        enabled = get_config().get_debug_checks()
    return enabled


@contextmanager
def debug_checks(enabled: bool = True) -> Iterator[None]:
    """Check every primitive output for NaN/Inf while active."""
    previous = getattr(_local, "debug", None)
    _local.debug = enabled
    try:
        yield
    finally:
        _local.debug = previous


class Tensor:
    """
    Array value with an optional gradient buffer.

    ``grad`` stays None until ParameterStore.zero_grad() or backward()
    populates it; when present it has the shape of ``data``.
    """

    __slots__ = ("data", "requires_grad", "grad", "name")

    def __init__(
        self,
        data: ArrayLike,
        requires_grad: bool = False,
        dtype=None,
        name: Optional[str] = None,
    ):
        if isinstance(data, Tensor):
            data = data.data
        arr = np.asarray(data, dtype=dtype or default_dtype())
        if arr.ndim > MAX_RANK:
            raise DimensionError(f"Tensor rank must be at most {MAX_RANK}, got shape {arr.shape}")
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self)

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> "Tensor":
        """Same values, cut from the tape."""
        return Tensor(self.data, requires_grad=False, dtype=self.data.dtype)

    def __float__(self) -> float:
        if self.data.size != 1:
            raise DimensionError(f"only single-element tensors convert to float, got {self.shape}")
        return float(self.data.reshape(-1)[0])

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}, requires_grad={self.requires_grad}{label})"

    # Operator sugar; the primitives live in gluenet.autodiff.ops
    def __add__(self, other):
        from gluenet.autodiff import ops
        return ops.add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        from gluenet.autodiff import ops
        return ops.sub(self, other)

    def __rsub__(self, other):
        from gluenet.autodiff import ops
        return ops.sub(other, self)

    def __mul__(self, other):
        from gluenet.autodiff import ops
        if isinstance(other, (int, float)):
            return ops.scale(self, other)
        return ops.mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        from gluenet.autodiff import ops
        if not isinstance(other, (int, float)):
            raise TypeError("Tensor division is only defined by a scalar")
        return ops.scale(self, 1.0 / other)

    def __neg__(self):
        from gluenet.autodiff import ops
        return ops.scale(self, -1.0)

    def __matmul__(self, other):
        from gluenet.autodiff import ops
        return ops.matmul(self, other)


def as_tensor(value: ArrayLike, dtype=None) -> Tensor:
    """Wrap constants; tensors pass through untouched."""
    if isinstance(value, Tensor):
        return value
    return Tensor(value, requires_grad=False, dtype=dtype)
