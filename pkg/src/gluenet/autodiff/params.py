"""
Named parameter storage.

Names are dotted paths such as ``body.rm3.token_mlp.w1``; iteration is
lexicographic so optimizer state, checkpoints and finite-difference sweeps
all visit parameters in the same order.
"""
from __future__ import annotations

from collections.abc import Mapping
from typing import Iterator, Optional

import numpy as np

from gluenet.autodiff.tensor import Tensor
from gluenet.common.errors import ContractError, DimensionError


class ParameterStore(Mapping):
    """Map from parameter path to a Tensor with requires_grad set."""

    def __init__(self, params: Optional[dict[str, Tensor]] = None):
        self._params: dict[str, Tensor] = {}
        for name, tensor in (params or {}).items():
            self.add(name, tensor)

    def add(self, name: str, value) -> Tensor:
        if name in self._params:
            raise ContractError(f"duplicate parameter name {name!r}")
        tensor = value if isinstance(value, Tensor) else Tensor(value)
        tensor.requires_grad = True
        tensor.name = name
        self._params[name] = tensor
        return tensor

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self._params))

    def __len__(self) -> int:
        return len(self._params)

    def num_elements(self) -> int:
        return int(sum(t.size for t in self._params.values()))

    def zero_grad(self) -> None:
        """Give every parameter a zero gradient buffer."""
        for tensor in self._params.values():
            tensor.grad = np.zeros_like(tensor.data)

    def clear_grad(self) -> None:
        for tensor in self._params.values():
            tensor.grad = None

    def arrays(self) -> dict[str, np.ndarray]:
        """Copies of the parameter values, in iteration order."""
        return {name: self[name].data.copy() for name in self}

    def load_arrays(self, arrays: Mapping[str, np.ndarray]) -> None:
        """Overwrite values in place; names and shapes must match exactly."""
        missing = set(self._params) ^ set(arrays)
        if missing:
            raise DimensionError(f"parameter names differ: {sorted(missing)}")
        for name, value in arrays.items():
            tensor = self._params[name]
            value = np.asarray(value)
            if value.shape != tensor.shape:
                raise DimensionError(f"{name}: expected shape {tensor.shape}, got {value.shape}")
            tensor.data = value.astype(tensor.dtype, copy=True)

    def with_prefix(self, prefix: str) -> "ParameterStore":
        """View sharing the same tensors under ``prefix/name`` keys."""
        view = ParameterStore()
        for name in self:
            view._params[f"{prefix}/{name}"] = self._params[name]
        return view

    @classmethod
    def union(cls, *stores: "ParameterStore") -> "ParameterStore":
        """Combine stores that already carry distinct (prefixed) names."""
        merged = cls()
        for store in stores:
            for name in store:
                if name in merged._params:
                    raise ContractError(f"duplicate parameter name {name!r}")
                merged._params[name] = store[name]
        return merged

    def __repr__(self) -> str:
        return f"ParameterStore({len(self)} tensors, {self.num_elements()} elements)"
