"""Video frontend: frame sampling, corruption, patch embedding.

Frames are (N_f, 3, H, W) arrays with values in [0, 1]. Patchifying uses
row-major patch order and channel-major flattening inside a patch
(channel, then patch row, then patch column), and is exactly invertible.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InputError, ShapeError
from .numerics import Tensor, ops

PATCH_SIZE = 16
MAX_GAUSSIAN_VARIANCE = 0.2


@dataclass
class FrameStack:
    """A sorted selection of frames from one clip."""

    frames: np.ndarray                 # (N_f, 3, H, W) in [0, 1]
    source_frame_indices: list[int]

    def __post_init__(self):
        self.frames = np.asarray(self.frames)
        if self.frames.ndim != 4 or self.frames.shape[1] != 3:
            raise ShapeError(f"frames must be (N_f, 3, H, W), got {self.frames.shape}")
        if len(self.source_frame_indices) != self.frames.shape[0]:
            raise ShapeError("index count does not match frame count")
        idx = np.asarray(self.source_frame_indices)
        if idx.size and np.any(np.diff(idx) <= 0):
            raise InputError("source_frame_indices must be strictly increasing")


def sample_frames(clip_frames: np.ndarray, n_f: int,
                  rng: np.random.Generator) -> FrameStack:
    """Pick ``n_f`` distinct frames uniformly without replacement, sorted."""
    native = clip_frames.shape[0]
    if n_f < 1 or n_f > native:
        raise InputError(f"cannot sample {n_f} frames from a {native}-frame clip")
    idx = np.sort(rng.choice(native, size=n_f, replace=False))
    return FrameStack(frames=clip_frames[idx], source_frame_indices=[int(i) for i in idx])


def corrupt_frames(stack: FrameStack, darkness_factor: float,
                   gaussian_variance: float, rng: np.random.Generator) -> FrameStack:
    """Scale pixels by the darkness factor, add Gaussian noise, clip to [0,1]."""
    if not 0.0 < darkness_factor <= 1.0:
        raise ConfigError(f"darkness factor must be in (0, 1], got {darkness_factor}")
    if not 0.0 <= gaussian_variance <= MAX_GAUSSIAN_VARIANCE:
        raise ConfigError(
            f"gaussian variance must be in [0, {MAX_GAUSSIAN_VARIANCE}], got {gaussian_variance}")
    out = stack.frames * darkness_factor
    if gaussian_variance > 0.0:
        out = out + rng.normal(0.0, np.sqrt(gaussian_variance), size=out.shape)
    return FrameStack(frames=np.clip(out, 0.0, 1.0),
                      source_frame_indices=list(stack.source_frame_indices))


def patchify(frame: np.ndarray, patch: int = PATCH_SIZE) -> np.ndarray:
    """(3, H, W) -> (N, 3*patch^2) with N = (H/patch)*(W/patch)."""
    c, h, w = frame.shape
    if h % patch or w % patch:
        raise ShapeError(f"frame extents {(h, w)} not divisible by patch size {patch}")
    gh, gw = h // patch, w // patch
    tiles = frame.reshape(c, gh, patch, gw, patch)
    return tiles.transpose(1, 3, 0, 2, 4).reshape(gh * gw, c * patch * patch)


def reassemble(patches: np.ndarray, height: int, width: int,
               patch: int = PATCH_SIZE) -> np.ndarray:
    """Inverse of :func:`patchify`."""
    gh, gw = height // patch, width // patch
    if patches.shape != (gh * gw, 3 * patch * patch):
        raise ShapeError(f"unexpected patch matrix shape {patches.shape}")
    tiles = patches.reshape(gh, gw, 3, patch, patch).transpose(2, 0, 3, 1, 4)
    return tiles.reshape(3, height, width)


def patchify_stack(frames: np.ndarray, patch: int = PATCH_SIZE) -> np.ndarray:
    """(B, 3, H, W) -> (B, N, 3*patch^2); same layout as patchify per frame."""
    b, c, h, w = frames.shape
    if h % patch or w % patch:
        raise ShapeError(f"frame extents {(h, w)} not divisible by patch size {patch}")
    gh, gw = h // patch, w // patch
    tiles = frames.reshape(b, c, gh, patch, gw, patch)
    return tiles.transpose(0, 2, 4, 1, 3, 5).reshape(b, gh * gw, c * patch * patch)


def embed_patches(patches: Tensor, projection: Tensor, pos_emb: Tensor,
                  class_token: Tensor) -> Tensor:
    """Project patch rows to model width, prepend the class token, add positions.

    patches: (B, N, 3P^2); projection: (3P^2, d); pos_emb: (N+1, d);
    class_token: (1, d). Output: (B, N+1, d), class token at index 0.
    """
    if patches.ndim != 3:
        raise ShapeError(f"patches must be (B, N, 3P^2), got {patches.shape}")
    b, n, pdim = patches.shape
    if projection.shape[0] != pdim:
        raise ShapeError(
            f"projection expects rows of {projection.shape[0]}, patches have {pdim}")
    d = projection.shape[1]
    if pos_emb.shape != (n + 1, d):
        raise ShapeError(f"pos_emb must be ({n + 1}, {d}), got {pos_emb.shape}")
    if class_token.shape != (1, d):
        raise ShapeError(f"class_token must be (1, {d}), got {class_token.shape}")
    projected = ops.matmul(patches, projection)                  # (B, N, d)
    cls = ops.repeat0(ops.reshape(class_token, (1, 1, d)), b)    # (B, 1, d)
    tokens = ops.concat([cls, projected], axis=1)                # (B, N+1, d)
    return ops.add(tokens, pos_emb)
