"""
Define-by-run tape and the reverse-mode sweep.

A Tape is entered as a context manager; primitives applied while it is the
active tape (and whose inputs require grad) append a TapeNode. The active
tape is thread-local, so a tape is confined to the thread that opened it.
"""
from __future__ import annotations

import logging
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from gluenet.autodiff.tensor import Tensor
from gluenet.common.errors import ContractError

log = logging.getLogger(__name__)

_local = threading.local()

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


@dataclass
class TapeNode:
    """One recorded primitive application."""
    op: str
    output: Tensor
    inputs: tuple[Tensor, ...]
    backward: BackwardFn


def _stack() -> list:
    if not hasattr(_local, "stack"):
        _local.stack = []
    return _local.stack


def current_tape() -> Optional["Tape"]:
    stack = _stack()
    return stack[-1] if stack else None


class Tape:
    """Ordered record of primitive applications (inputs always precede outputs)."""

    def __init__(self):
        self.nodes: list[TapeNode] = []

    def record(self, node: TapeNode) -> None:
        self.nodes.append(node)

    def clear(self) -> None:
        self.nodes.clear()

    def __len__(self) -> int:
        return len(self.nodes)

    def __enter__(self) -> "Tape":
        _stack().append(self)
        return self

    def __exit__(self, *exc) -> None:
        _stack().pop()


@contextmanager
def no_grad() -> Iterator[None]:
    """Suspend recording, e.g. for evaluation passes inside a taped region."""
    _stack().append(None)
    try:
        yield
    finally:
        _stack().pop()


def backward(loss: Tensor, tape: Tape) -> None:
    """
    Populate ``grad`` on every leaf tensor reachable from ``loss``.

    Leaves that already hold a gradient buffer accumulate into it. The tape
    is consumed.
    """
    if loss.ndim != 0:
        raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")

    produced = {id(node.output) for node in tape.nodes}
    if id(loss) not in produced:
        raise ContractError("loss was not recorded on this tape")

    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    leaves: dict[int, Tensor] = {}

    for node in reversed(tape.nodes):
        grad_out = grads.pop(id(node.output), None)
        if grad_out is None:
            continue
        for inp, grad_in in zip(node.inputs, node.backward(grad_out)):
            if grad_in is None or not inp.requires_grad:
                continue
            key = id(inp)
            if key in grads:
                grads[key] = grads[key] + grad_in
            else:
                grads[key] = grad_in
            if key not in produced:
                leaves[key] = inp

    for key, leaf in leaves.items():
        grad = np.asarray(grads[key], dtype=leaf.dtype)
        leaf.grad = grad if leaf.grad is None else leaf.grad + grad

    log.debug(f"backward swept {len(tape.nodes)} nodes into {len(leaves)} leaves")
    tape.clear()
