"""Flat binary tensor container.

Layout: 8-byte magic ``UFFIAC01``, uint32 little-endian JSON header
length, the UTF-8 JSON header, then the raw little-endian values of every
tensor in header order. The header carries a mandatory ``version`` field,
a ``kind`` tag (model checkpoints, mel caches and frame packs share the
container), per-tensor name/shape/dtype, and free-form ``meta``.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import InputError

MAGIC = b"UFFIAC01"
VERSION = 1

_DTYPES = {"float32": "<f4", "float64": "<f8", "uint8": "|u1", "int64": "<i8"}


def save_container(path, arrays: dict[str, np.ndarray], kind: str, meta: dict | None = None) -> None:
    """Write named arrays to ``path``; values are stored little-endian."""
    entries = []
    blobs = []
    for name, arr in arrays.items():
        arr = np.asarray(arr)
        dtype_name = arr.dtype.name
        if dtype_name not in _DTYPES:
            raise InputError(f"container cannot store dtype {dtype_name!r} (tensor {name!r})")
        blob = np.ascontiguousarray(arr.astype(_DTYPES[dtype_name], copy=False)).tobytes()
        entries.append({"name": name, "shape": list(arr.shape), "dtype": dtype_name,
                        "nbytes": len(blob)})
        blobs.append(blob)
    header = {"version": VERSION, "kind": kind, "meta": meta or {}, "tensors": entries}
    raw = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(raw)))
        f.write(raw)
        for blob in blobs:
            f.write(blob)


def load_container(path, expect_kind: str | None = None) -> tuple[dict[str, np.ndarray], dict]:
    """Read a container; returns (arrays, header). Optionally checks the kind tag."""
    path = Path(path)
    with open(path, "rb") as f:
        magic = f.read(len(MAGIC))
        if magic != MAGIC:
            raise InputError(f"{path}: not a tensor container (bad magic {magic!r})")
        (hlen,) = struct.unpack("<I", f.read(4))
        header = json.loads(f.read(hlen).decode("utf-8"))
        if "version" not in header:
            raise InputError(f"{path}: container header missing mandatory version field")
        if header["version"] != VERSION:
            raise InputError(f"{path}: unsupported container version {header['version']}")
        if expect_kind is not None and header.get("kind") != expect_kind:
            raise InputError(
                f"{path}: container kind {header.get('kind')!r}, expected {expect_kind!r}")
        arrays = {}
        for entry in header["tensors"]:
            count = int(np.prod(entry["shape"])) if entry["shape"] else 1
            buf = f.read(entry["nbytes"])
            if len(buf) != entry["nbytes"]:
                raise InputError(f"{path}: truncated payload for tensor {entry['name']!r}")
            arr = np.frombuffer(buf, dtype=_DTYPES[entry["dtype"]], count=count)
            arrays[entry["name"]] = arr.reshape(entry["shape"]).astype(entry["dtype"])
    return arrays, header
