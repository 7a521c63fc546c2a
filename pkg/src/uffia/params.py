"""Walking parameter trees (dataclasses / lists / dicts of Tensors)."""
from __future__ import annotations

import dataclasses

from .numerics import Tensor


def named_tensors(obj, prefix: str = "") -> dict[str, Tensor]:
    """Flatten any nesting of dataclasses, lists and dicts into name -> Tensor."""
    out: dict[str, Tensor] = {}

    def walk(node, path):
        if isinstance(node, Tensor):
            out[path] = node
        elif dataclasses.is_dataclass(node) and not isinstance(node, type):
            for f in dataclasses.fields(node):
                walk(getattr(node, f.name), f"{path}.{f.name}" if path else f.name)
        elif isinstance(node, (list, tuple)):
            for i, item in enumerate(node):
                walk(item, f"{path}.{i}")
        elif isinstance(node, dict):
            for k, item in node.items():
                walk(item, f"{path}.{k}" if path else str(k))

    walk(obj, prefix)
    return out


def load_into(obj, arrays: dict, prefix: str = "") -> None:
    """Copy array values into an existing parameter tree by name."""
    params = named_tensors(obj, prefix)
    missing = set(params) - set(arrays)
    if missing:
        raise KeyError(f"checkpoint missing tensors: {sorted(missing)[:5]}...")
    for name, tensor in params.items():
        value = arrays[name]
        if tuple(value.shape) != tensor.shape:
            raise ValueError(f"{name}: checkpoint shape {value.shape} != model {tensor.shape}")
        tensor.data = value.astype(tensor.data.dtype)
