"""Structural layer inventory of a built model."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import torch.nn as nn

from ..errors import CountingError
from .layers import GDN, WindowAttention

PRICED_KINDS = ("conv", "tconv", "dense", "attention_qkv", "attention_matmul")
UNPRICED_KINDS = ("gdn", "layernorm", "density")
KINDS = PRICED_KINDS + UNPRICED_KINDS
PHASES = ("encode_only", "decode_only", "shared")


@dataclass(frozen=True)
class LayerRecord:
    """One parameterized layer.

    ``grid`` is the downsampling factor of the layer's output grid relative
    to the full-resolution image; a transposed conv's input grid is
    ``grid * stride``. ``tokens`` is the window token count for attention.
    """

    name: str
    kind: str
    kernel: int
    in_channels: int
    out_channels: int
    stride: int
    spatial_scope: str
    phase: str
    grid: int
    params: int
    tokens: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


LayerInventory = list  # list[LayerRecord], ordered by module registration


def _own_params(m: nn.Module) -> int:
    return sum(p.numel() for p in m.parameters(recurse=False) if p.requires_grad)


def _record(name: str, m: nn.Module) -> LayerRecord | None:
    grid = getattr(m, "rdc_grid", None)
    phase = getattr(m, "rdc_phase", None)
    n = _own_params(m)
    common = dict(name=name, phase=phase, grid=grid, params=n)
    if isinstance(m, nn.ConvTranspose2d):
        return LayerRecord(kind="tconv", kernel=m.kernel_size[0], in_channels=m.in_channels,
                           out_channels=m.out_channels, stride=m.stride[0], spatial_scope="per_pixel", **common)
    if isinstance(m, nn.Conv2d):
        return LayerRecord(kind="conv", kernel=m.kernel_size[0], in_channels=m.in_channels,
                           out_channels=m.out_channels, stride=m.stride[0], spatial_scope="per_pixel", **common)
    if isinstance(m, nn.Linear):
        return LayerRecord(kind=getattr(m, "rdc_kind", "dense"), kernel=1, in_channels=m.in_features,
                           out_channels=m.out_features, stride=1, spatial_scope="per_pixel", **common)
    if isinstance(m, WindowAttention):
        return LayerRecord(kind="attention_matmul", kernel=m.window, in_channels=m.dim, out_channels=m.dim,
                           stride=1, spatial_scope="windowed", tokens=m.window * m.window, **common)
    if isinstance(m, GDN):
        c = m.beta.numel()
        return LayerRecord(kind="gdn", kernel=1, in_channels=c, out_channels=c, stride=1,
                           spatial_scope="per_pixel", **common)
    if isinstance(m, nn.LayerNorm):
        c = m.normalized_shape[0]
        return LayerRecord(kind="layernorm", kernel=1, in_channels=c, out_channels=c, stride=1,
                           spatial_scope="per_pixel", **common)
    kind = getattr(m, "rdc_kind", None)
    if kind == "density":
        # the density owns its parameter containers; count them as one layer
        c = getattr(m, "channels", 0)
        common["params"] = sum(p.numel() for p in m.parameters() if p.requires_grad)
        return LayerRecord(kind="density", kernel=0, in_channels=c, out_channels=c, stride=1,
                           spatial_scope="per_pixel", **common)
    if n:
        raise CountingError(f"module {name} ({type(m).__name__}) owns parameters but has no inventory rule")
    return None


def layer_inventory(handle: nn.Module) -> LayerInventory:
    """List every parameterized layer of ``handle`` in registration order."""
    records = []
    owned: list[str] = []
    for name, m in handle.named_modules():
        if any(name.startswith(prefix) for prefix in owned):
            continue
        rec = _record(name, m)
        if rec is None:
            continue
        if rec.grid is None or rec.phase is None:
            raise CountingError(f"layer {name} was built without grid/phase tags")
        records.append(rec)
        if rec.kind == "density":
            owned.append(f"{name}." if name else "")
    return records


def inventory_params(records) -> int:
    return sum(r.params for r in records)
