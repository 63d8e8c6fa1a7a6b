"""Tensor core: dense tensors with tape-based reverse-mode differentiation."""

from gluenet.autodiff import ops
from gluenet.autodiff.gradcheck import check_gradients, finite_diff_grad
from gluenet.autodiff.params import ParameterStore
from gluenet.autodiff.tape import Tape, backward, current_tape, no_grad
from gluenet.autodiff.tensor import Tensor, as_tensor, debug_checks, default_dtype, precision

__all__ = [
    "ops",
    "Tensor",
    "Tape",
    "ParameterStore",
    "as_tensor",
    "backward",
    "check_gradients",
    "current_tape",
    "debug_checks",
    "default_dtype",
    "finite_diff_grad",
    "no_grad",
    "precision",
]
