"""Channel-wise autoregressive entropy model.

The latent is cut into N equal channel slices decoded in order. Slice i's
mean and scale come from its share of the hyper features plus the refined
slices 0..i-1; after decoding, a latent residual prediction (LRP) built from
the same context and the decoded slice itself is merged back in.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import torch
import torch.nn as nn

from ..config import ModelConfig
from ..errors import ConfigError, ContractError
from ..zoo.layers import place, set_phase
from .gaussian import EntropyParams


@dataclass
class SliceContext:
    index: int
    hyper_features: torch.Tensor
    decoded: list[torch.Tensor] = field(default_factory=list)

    def check(self) -> None:
        if len(self.decoded) != self.index:
            raise ContractError(
                f"slice {self.index} must see exactly {self.index} decoded slices, got {len(self.decoded)}"
            )


class HyperSplit(nn.Module):
    """N independent 1x1 projections of the hyper-synthesis output.

    Each maps all C_u channels to C_u/N; none reads another's output, so they
    can run concurrently.
    """

    def __init__(self, in_channels: int, num_slices: int):
        super().__init__()
        if in_channels % num_slices:
            raise ConfigError(f"C_u={in_channels} not divisible by N={num_slices}")
        self.out_channels = in_channels // num_slices
        self.heads = nn.ModuleList(nn.Conv2d(in_channels, self.out_channels, 1) for _ in range(num_slices))

    def forward(self, u: torch.Tensor) -> list[torch.Tensor]:
        return [head(u) for head in self.heads]


def split_hyper_features(u: torch.Tensor, splitter: HyperSplit) -> list[torch.Tensor]:
    return splitter(u)


def _param_net(in_ch: int, hidden, out_ch: int) -> nn.Sequential:
    h1, h2 = hidden
    return nn.Sequential(
        nn.Conv2d(in_ch, h1, 3, padding=1), nn.ReLU(),
        nn.Conv2d(h1, h2, 3, padding=1), nn.ReLU(),
        nn.Conv2d(h2, out_ch, 3, padding=1),
    )


def merge_lrp(decoded_slice: torch.Tensor, lrp: torch.Tensor, mode: str, conv: nn.Conv2d | None = None):
    if decoded_slice.shape != lrp.shape:
        raise ContractError(f"slice {tuple(decoded_slice.shape)} vs lrp {tuple(lrp.shape)}")
    if mode == "add":
        return decoded_slice + lrp
    if mode == "concat_1x1":
        if conv is None:
            raise ContractError("concat_1x1 merge needs its 1x1 conv")
        return conv(torch.cat([decoded_slice, lrp], dim=1))
    raise ContractError(f"unknown merge mode {mode!r}")


class CharmEntropyModel(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.num_slices = n = cfg.num_slices
        self.slice_depth = s = cfg.slice_depth
        self.merge_mode = cfg.lrp_merge
        cu = cfg.num_params_channels
        if cfg.hyper_split == "per_slice":
            self.splitter = HyperSplit(cu, n)
            support = self.splitter.out_channels
        else:
            self.splitter = None
            support = cu
        self.mean_nets = nn.ModuleList(_param_net(support + i * s, cfg.charm_hidden, s) for i in range(n))
        self.scale_nets = nn.ModuleList(_param_net(support + i * s, cfg.charm_hidden, s) for i in range(n))
        self.lrp_nets = nn.ModuleList(_param_net(support + (i + 1) * s, cfg.charm_hidden, s) for i in range(n))
        if self.merge_mode == "concat_1x1":
            self.merges = nn.ModuleList(nn.Conv2d(2 * s, s, 1) for _ in range(n))
            with torch.no_grad():
                eye = torch.eye(s)
                for m in self.merges:
                    # starts out equal to additive merging
                    m.weight.copy_(torch.cat([eye, eye], dim=1).view(s, 2 * s, 1, 1))
                    m.bias.zero_()
        else:
            self.merges = None
        place(self, 16)
        set_phase(self, "shared")

    def features(self, u: torch.Tensor) -> list[torch.Tensor]:
        if self.splitter is None:
            return [u] * self.num_slices
        return split_hyper_features(u, self.splitter)

    def slice_params(self, ctx: SliceContext) -> EntropyParams:
        ctx.check()
        support = torch.cat([ctx.hyper_features, *ctx.decoded], dim=1)
        i = ctx.index
        return EntropyParams.from_raw(self.mean_nets[i](support), self.scale_nets[i](support))

    def slice_lrp(self, ctx: SliceContext, y_hat_slice: torch.Tensor) -> torch.Tensor:
        ctx.check()
        support = torch.cat([ctx.hyper_features, *ctx.decoded, y_hat_slice], dim=1)
        return 0.5 * torch.tanh(self.lrp_nets[ctx.index](support))

    def merge(self, index: int, y_hat_slice: torch.Tensor, lrp: torch.Tensor) -> torch.Tensor:
        conv = self.merges[index] if self.merges is not None else None
        return merge_lrp(y_hat_slice, lrp, self.merge_mode, conv)


def charm_slice_params(model: CharmEntropyModel, ctx: SliceContext, y_hat_slice: torch.Tensor | None = None):
    """Entropy parameters for slice ``ctx.index`` and, once the slice is
    decoded, its LRP tensor (``None`` until ``y_hat_slice`` is given)."""
    params = model.slice_params(ctx)
    lrp = model.slice_lrp(ctx, y_hat_slice) if y_hat_slice is not None else None
    return params, lrp
