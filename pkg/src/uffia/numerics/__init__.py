"""Minimal dense tensor library with reverse-mode differentiation."""
from .adam import AdamState, adam_step
from .checkpoint import load_container, save_container
from .gradcheck import finite_difference_check
from .rng import clip_rng, make_rng
from .tensor import (Tensor, backward, default_dtype, grad_enabled, no_grad,
                     precision, set_default_dtype)
from . import ops

__all__ = [
    "AdamState", "Tensor", "adam_step", "backward", "clip_rng",
    "default_dtype", "finite_difference_check", "grad_enabled",
    "load_container", "make_rng", "no_grad", "ops", "precision",
    "save_container", "set_default_dtype",
]
