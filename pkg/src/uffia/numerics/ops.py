"""Differentiable operations over :class:`~uffia.numerics.tensor.Tensor`.

Each op validates its shape contract, computes the forward value with
numpy, and registers a closure that maps the output gradient to input
gradients. Backward formulas are exact (no approximations) so the whole
library can be verified against central finite differences.
"""
from __future__ import annotations

import numpy as np

from ..errors import NumericError, ShapeError
from .tensor import Tensor


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast_suffix(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum gradient over the leading axes a trailing-suffix operand lacked."""
    extra = g.ndim - len(shape)
    if extra:
        g = g.sum(axis=tuple(range(extra)))
    return g


# -- elementwise -----------------------------------------------------------

def add(a, b) -> Tensor:
    """a + b where b.shape equals a.shape or a trailing suffix of it."""
    a, b = _as_tensor(a), _as_tensor(b)
    if a.shape != b.shape and a.shape[a.ndim - b.ndim:] != b.shape:
        raise ShapeError(f"add: {b.shape} is not a trailing suffix of {a.shape}")
    out = a.data + b.data

    def backward(g):
        if a.requires_grad:
            a._accumulate(g)
        if b.requires_grad:
            b._accumulate(_unbroadcast_suffix(g, b.shape))

    return Tensor._from_op(out, (a, b), backward, "add")


def neg(a) -> Tensor:
    a = _as_tensor(a)

    def backward(g):
        if a.requires_grad:
            a._accumulate(-g)

    return Tensor._from_op(-a.data, (a,), backward, "neg")


def mul(a, b) -> Tensor:
    """Elementwise product; b may be a python scalar or an equal-shape tensor."""
    a = _as_tensor(a)
    if isinstance(b, (int, float)):
        scale = float(b)

        def backward_scalar(g):
            if a.requires_grad:
                a._accumulate(g * scale)

        return Tensor._from_op(a.data * scale, (a,), backward_scalar, "mul")

    b = _as_tensor(b)
    if a.shape != b.shape:
        raise ShapeError(f"mul: shapes {a.shape} and {b.shape} differ")

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * b.data)
        if b.requires_grad:
            b._accumulate(g * a.data)

    return Tensor._from_op(a.data * b.data, (a, b), backward, "mul")


def exp(a) -> Tensor:
    a = _as_tensor(a)
    out = np.exp(a.data)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * out)

    return Tensor._from_op(out, (a,), backward, "exp")


def log(a) -> Tensor:
    a = _as_tensor(a)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g / a.data)

    return Tensor._from_op(np.log(a.data), (a,), backward, "log")


def relu(a) -> Tensor:
    a = _as_tensor(a)
    mask = a.data > 0

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * mask)

    return Tensor._from_op(a.data * mask, (a,), backward, "relu")


def tanh(a) -> Tensor:
    a = _as_tensor(a)
    out = np.tanh(a.data)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * (1.0 - out * out))

    return Tensor._from_op(out, (a,), backward, "tanh")


_GELU_C = 0.7978845608028654  # sqrt(2/pi)


def gelu(a) -> Tensor:
    """GELU, tanh form: 0.5*x*(1 + tanh(c*(x + 0.044715*x^3)))."""
    a = _as_tensor(a)
    x = a.data
    x2 = x * x
    inner = _GELU_C * (x + 0.044715 * x2 * x)
    t = np.tanh(inner)
    out = 0.5 * x * (1.0 + t)

    def backward(g):
        if a.requires_grad:
            sech2 = 1.0 - t * t
            d_inner = _GELU_C * (1.0 + 3 * 0.044715 * x2)
            a._accumulate(g * (0.5 * (1.0 + t) + 0.5 * x * sech2 * d_inner))

    return Tensor._from_op(out, (a,), backward, "gelu")


# -- shape manipulation ------------------------------------------------------

def reshape(a, shape) -> Tensor:
    a = _as_tensor(a)
    old = a.shape
    out = a.data.reshape(shape)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g.reshape(old))

    return Tensor._from_op(out, (a,), backward, "reshape")


def transpose(a, axes) -> Tensor:
    a = _as_tensor(a)
    inverse = tuple(np.argsort(axes))

    def backward(g):
        if a.requires_grad:
            a._accumulate(g.transpose(inverse))

    return Tensor._from_op(a.data.transpose(axes), (a,), backward, "transpose")


def getitem(a, idx) -> Tensor:
    """Basic slicing (ints, slices, tuples thereof); no advanced indexing."""
    a = _as_tensor(a)

    def backward(g):
        if a.requires_grad:
            full = np.zeros_like(a.data)
            full[idx] = g
            a._accumulate(full)

    return Tensor._from_op(a.data[idx], (a,), backward, "getitem")


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = [_as_tensor(t) for t in tensors]
    sizes = [t.shape[axis] for t in tensors]
    out = np.concatenate([t.data for t in tensors], axis=axis)
    bounds = np.cumsum(sizes)[:-1]

    def backward(g):
        pieces = np.split(g, bounds, axis=axis)
        for t, piece in zip(tensors, pieces):
            if t.requires_grad:
                t._accumulate(piece)

    return Tensor._from_op(out, tuple(tensors), backward, "concat")


def repeat0(a, repeats: int) -> Tensor:
    """Repeat each index along axis 0 ``repeats`` times (block-interleaved)."""
    a = _as_tensor(a)
    n = a.shape[0]

    def backward(g):
        if a.requires_grad:
            a._accumulate(g.reshape((n, repeats) + a.shape[1:]).sum(axis=1))

    return Tensor._from_op(np.repeat(a.data, repeats, axis=0), (a,), backward, "repeat0")


# -- reductions --------------------------------------------------------------

def sum_(a, axis=None, keepdims=False) -> Tensor:
    a = _as_tensor(a)
    out = a.data.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        if a.requires_grad:
            if axis is None:
                a._accumulate(np.broadcast_to(g, a.shape).copy())
            else:
                gg = g if keepdims else np.expand_dims(g, axis)
                a._accumulate(np.broadcast_to(gg, a.shape).copy())

    return Tensor._from_op(out, (a,), backward, "sum")


def mean(a, axis=None, keepdims=False) -> Tensor:
    a = _as_tensor(a)
    out = a.data.mean(axis=axis, keepdims=keepdims)
    count = a.size if axis is None else a.shape[axis]

    def backward(g):
        if a.requires_grad:
            if axis is None:
                a._accumulate(np.broadcast_to(g / count, a.shape).copy())
            else:
                gg = g if keepdims else np.expand_dims(g, axis)
                a._accumulate(np.broadcast_to(gg / count, a.shape).copy())

    return Tensor._from_op(out, (a,), backward, "mean")


def amax(a, axis: int) -> Tensor:
    """Max along one axis; gradient routes to the first maximum (ties)."""
    a = _as_tensor(a)
    idx = np.argmax(a.data, axis=axis)
    out = np.take_along_axis(a.data, np.expand_dims(idx, axis), axis=axis).squeeze(axis)

    def backward(g):
        if a.requires_grad:
            full = np.zeros_like(a.data)
            np.put_along_axis(full, np.expand_dims(idx, axis), np.expand_dims(g, axis), axis=axis)
            a._accumulate(full)

    return Tensor._from_op(out, (a,), backward, "amax")


# -- linear algebra ----------------------------------------------------------

def matmul(a, b) -> Tensor:
    """Matrix product.

    Supported shapes: (m,k)@(k,n), batched (...,m,k)@(...,k,n) with equal
    batch prefixes, and batched-by-weight (...,m,k)@(k,n).
    """
    a, b = _as_tensor(a), _as_tensor(b)
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError(f"matmul needs 2-d+ operands, got {a.shape} @ {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul inner extents differ: {a.shape} @ {b.shape}")
    if b.ndim > 2 and a.shape[:-2] != b.shape[:-2]:
        raise ShapeError(f"matmul batch prefixes differ: {a.shape} @ {b.shape}")
    out = a.data @ b.data

    def backward(g):
        if a.requires_grad:
            a._accumulate(g @ np.swapaxes(b.data, -1, -2))
        if b.requires_grad:
            gb = np.swapaxes(a.data, -1, -2) @ g
            if b.ndim == 2 and gb.ndim > 2:
                gb = gb.sum(axis=tuple(range(gb.ndim - 2)))
            b._accumulate(gb)

    return Tensor._from_op(out, (a, b), backward, "matmul")


def softmax(a, axis: int = -1) -> Tensor:
    """Numerically stable softmax along ``axis``; rows sum to one."""
    a = _as_tensor(a)
    if np.isnan(a.data).any():
        raise NumericError("softmax input contains NaN")
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        if a.requires_grad:
            inner = (g * out).sum(axis=axis, keepdims=True)
            a._accumulate(out * (g - inner))

    return Tensor._from_op(out, (a,), backward, "softmax")


def log_softmax(a, axis: int = -1) -> Tensor:
    a = _as_tensor(a)
    if np.isnan(a.data).any():
        raise NumericError("log_softmax input contains NaN")
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    out = shifted - lse
    soft = np.exp(out)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g - soft * g.sum(axis=axis, keepdims=True))

    return Tensor._from_op(out, (a,), backward, "log_softmax")


def layer_norm(a, gain, bias, eps: float = 1e-5) -> Tensor:
    """Normalize the last axis to zero mean, unit variance, then affine."""
    a, gain, bias = _as_tensor(a), _as_tensor(gain), _as_tensor(bias)
    d = a.shape[-1]
    if d < 2:
        raise ShapeError("layer_norm needs a last axis of extent >= 2")
    if gain.shape != (d,) or bias.shape != (d,):
        raise ShapeError(f"layer_norm affine params must have shape ({d},)")
    mu = a.data.mean(axis=-1, keepdims=True)
    centered = a.data - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = centered * inv
    out = xhat * gain.data + bias.data

    def backward(g):
        if gain.requires_grad:
            gain._accumulate((g * xhat).reshape(-1, d).sum(axis=0))
        if bias.requires_grad:
            bias._accumulate(g.reshape(-1, d).sum(axis=0))
        if a.requires_grad:
            gx = g * gain.data
            term = (gx * xhat).mean(axis=-1, keepdims=True)
            a._accumulate(inv * (gx - gx.mean(axis=-1, keepdims=True) - xhat * term))

    return Tensor._from_op(out, (a, gain, bias), backward, "layer_norm")


def cross_entropy(logits, labels) -> Tensor:
    """Mean over the batch of -log softmax(logits)[label]."""
    from ..errors import ContractError

    logits = _as_tensor(logits)
    if logits.ndim != 2:
        raise ShapeError(f"cross_entropy expects (batch, classes), got {logits.shape}")
    labels = np.asarray(labels, dtype=np.int64)
    n, c = logits.shape
    if labels.shape != (n,):
        raise ShapeError(f"labels shape {labels.shape} does not match batch {n}")
    if labels.min() < 0 or labels.max() >= c:
        raise ContractError(f"label out of range [0,{c}): {labels.min()}..{labels.max()}")
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    logp = shifted - lse
    out = np.asarray(-logp[np.arange(n), labels].mean(), dtype=logits.dtype)

    def backward(g):
        if logits.requires_grad:
            grad = np.exp(logp)
            grad[np.arange(n), labels] -= 1.0
            logits._accumulate(grad * (g / n))

    return Tensor._from_op(out, (logits,), backward, "cross_entropy")


# -- convolution and pooling --------------------------------------------------

def _im2col(x: np.ndarray, kh: int, kw: int, pad_mode: str) -> np.ndarray:
    """(B,C,H,W) -> (B,H,W,C*kh*kw) patches of a padded 'same' window."""
    b, c, h, w = x.shape
    ph, pw = kh // 2, kw // 2
    mode = "edge" if pad_mode == "edge" else "constant"
    padded = np.pad(x, ((0, 0), (0, 0), (ph, ph), (pw, pw)), mode=mode)
    s = padded.strides
    view = np.lib.stride_tricks.as_strided(
        padded,
        shape=(b, c, h, w, kh, kw),
        strides=(s[0], s[1], s[2], s[3], s[2], s[3]),
        writeable=False,
    )
    return view.transpose(0, 2, 3, 1, 4, 5).reshape(b, h, w, c * kh * kw)


def conv2d(x, weight, bias, pad_mode: str = "zeros") -> Tensor:
    """2-D convolution, stride 1, 'same' padding.

    x: (B,C,H,W); weight: (K,C,kh,kw) with odd kh,kw; bias: (K,).
    ``pad_mode`` is 'zeros' or 'edge' (border replication, which keeps a
    constant input constant).
    """
    x, weight, bias = _as_tensor(x), _as_tensor(weight), _as_tensor(bias)
    if x.ndim != 4 or weight.ndim != 4:
        raise ShapeError(f"conv2d expects 4-d input and weight, got {x.shape}, {weight.shape}")
    if pad_mode not in ("zeros", "edge"):
        raise ShapeError(f"conv2d pad_mode must be 'zeros' or 'edge', got {pad_mode!r}")
    k, c, kh, kw = weight.shape
    if x.shape[1] != c:
        raise ShapeError(f"conv2d channel mismatch: input {x.shape[1]}, weight {c}")
    if kh % 2 == 0 or kw % 2 == 0:
        raise ShapeError("conv2d kernel extents must be odd for 'same' padding")
    b, _, h, w = x.shape
    cols = _im2col(x.data, kh, kw, pad_mode)             # (B,H,W,C*kh*kw)
    wflat = weight.data.reshape(k, -1)                   # (K,C*kh*kw)
    out = cols @ wflat.T + bias.data                     # (B,H,W,K)
    out = np.ascontiguousarray(out.transpose(0, 3, 1, 2))

    def backward(g):
        gout = g.transpose(0, 2, 3, 1)                   # (B,H,W,K)
        if bias.requires_grad:
            bias._accumulate(gout.reshape(-1, k).sum(axis=0))
        if weight.requires_grad:
            gw = gout.reshape(-1, k).T @ cols.reshape(-1, c * kh * kw)
            weight._accumulate(gw.reshape(weight.shape))
        if x.requires_grad:
            gcols = gout @ wflat                         # (B,H,W,C*kh*kw)
            gcols = gcols.reshape(b, h, w, c, kh, kw)
            ph, pw = kh // 2, kw // 2
            gpad = np.zeros((b, c, h + 2 * ph, w + 2 * pw), dtype=g.dtype)
            for i in range(kh):
                for j in range(kw):
                    gpad[:, :, i:i + h, j:j + w] += gcols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
            gx = gpad[:, :, ph:ph + h, pw:pw + w].copy()
            if pad_mode == "edge":
                # Replicated borders: fold pad-region grads into edge cells.
                gx[:, :, 0, :] += gpad[:, :, :ph, pw:pw + w].sum(axis=2)
                gx[:, :, -1, :] += gpad[:, :, ph + h:, pw:pw + w].sum(axis=2)
                gx[:, :, :, 0] += gpad[:, :, ph:ph + h, :pw].sum(axis=3)
                gx[:, :, :, -1] += gpad[:, :, ph:ph + h, pw + w:].sum(axis=3)
                gx[:, :, 0, 0] += gpad[:, :, :ph, :pw].sum(axis=(2, 3))
                gx[:, :, 0, -1] += gpad[:, :, :ph, pw + w:].sum(axis=(2, 3))
                gx[:, :, -1, 0] += gpad[:, :, ph + h:, :pw].sum(axis=(2, 3))
                gx[:, :, -1, -1] += gpad[:, :, ph + h:, pw + w:].sum(axis=(2, 3))
            x._accumulate(gx)

    return Tensor._from_op(out, (x, weight, bias), backward, "conv2d")


def max_pool2d(x, pool: tuple[int, int]) -> Tensor:
    """Non-overlapping max pooling; trailing rows/cols beyond a full window drop."""
    x = _as_tensor(x)
    if x.ndim != 4:
        raise ShapeError(f"max_pool2d expects (B,C,H,W), got {x.shape}")
    ph, pw = pool
    b, c, h, w = x.shape
    h2, w2 = h // ph, w // pw
    if h2 == 0 or w2 == 0:
        raise ShapeError(f"pool {pool} larger than spatial extents {(h, w)}")
    trimmed = x.data[:, :, :h2 * ph, :w2 * pw]
    windows = trimmed.reshape(b, c, h2, ph, w2, pw).transpose(0, 1, 2, 4, 3, 5)
    windows = windows.reshape(b, c, h2, w2, ph * pw)
    idx = np.argmax(windows, axis=-1)
    out = np.take_along_axis(windows, idx[..., None], axis=-1)[..., 0]

    def backward(g):
        if x.requires_grad:
            gwin = np.zeros((b, c, h2, w2, ph * pw), dtype=g.dtype)
            np.put_along_axis(gwin, idx[..., None], g[..., None], axis=-1)
            gwin = gwin.reshape(b, c, h2, w2, ph, pw).transpose(0, 1, 2, 4, 3, 5)
            full = np.zeros_like(x.data)
            full[:, :, :h2 * ph, :w2 * pw] = gwin.reshape(b, c, h2 * ph, w2 * pw)
            x._accumulate(full)

    return Tensor._from_op(out, (x,), backward, "max_pool2d")


def avg_pool2d(x, pool: tuple[int, int]) -> Tensor:
    """Non-overlapping average pooling with the same trimming rule as max."""
    x = _as_tensor(x)
    if x.ndim != 4:
        raise ShapeError(f"avg_pool2d expects (B,C,H,W), got {x.shape}")
    ph, pw = pool
    b, c, h, w = x.shape
    h2, w2 = h // ph, w // pw
    if h2 == 0 or w2 == 0:
        raise ShapeError(f"pool {pool} larger than spatial extents {(h, w)}")
    trimmed = x.data[:, :, :h2 * ph, :w2 * pw]
    out = trimmed.reshape(b, c, h2, ph, w2, pw).mean(axis=(3, 5))
    scale = 1.0 / (ph * pw)

    def backward(g):
        if x.requires_grad:
            full = np.zeros_like(x.data)
            expanded = np.repeat(np.repeat(g, ph, axis=2), pw, axis=3) * scale
            full[:, :, :h2 * ph, :w2 * pw] = expanded
            x._accumulate(full)

    return Tensor._from_op(out, (x,), backward, "avg_pool2d")
