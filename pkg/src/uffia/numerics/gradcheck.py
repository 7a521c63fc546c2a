"""Central finite-difference verification of analytic gradients."""
from __future__ import annotations

import numpy as np

from .tensor import Tensor, backward


def finite_difference_check(fn, tensors: dict[str, Tensor], h: float = 1e-5,
                            floor: float = 1e-4) -> float:
    """Return the max relative error between analytic and numeric grads.

    ``fn`` must recompute the scalar loss from the current values of
    ``tensors`` on every call. Relative error is |a - n| / max(|a|, |n|,
    floor), so gradients far below ``floor`` are compared absolutely.
    Run under float64 for meaningful results.
    """
    for t in tensors.values():
        t.zero_grad()
    loss = fn()
    backward(loss)
    analytic = {k: t.grad.copy() for k, t in tensors.items()}

    worst = 0.0
    for name, t in tensors.items():
        flat = t.data.reshape(-1)
        num = np.zeros_like(flat)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = fn().item()
            flat[i] = orig - h
            down = fn().item()
            flat[i] = orig
            num[i] = (up - down) / (2.0 * h)
        a = analytic[name].reshape(-1)
        denom = np.maximum(np.maximum(np.abs(a), np.abs(num)), floor)
        worst = max(worst, float(np.max(np.abs(a - num) / denom)))
    return worst
