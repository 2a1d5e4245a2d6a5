"""Analysis/synthesis transforms and hyper-transforms for each family."""

from __future__ import annotations

import torch
import torch.nn as nn

from ..config import LATENT_STRIDE, TOTAL_STRIDE, ModelConfig
from ..errors import ConfigError, ContractError, PaddingRequiredError
from .layers import (
    GDN, AttentionBlock, ResidualBottleneck, SwinStage,
    conv, deconv, patch_merge, patch_split, place, set_phase,
)


class TransformHandle(nn.Module):
    """A built transform with its shape contract.

    ``stride`` is the resampling factor between input and output grids
    (positive for downsampling roles, applied inversely for upsampling).
    ``multiple`` is the divisibility required of the input's spatial dims.
    """

    def __init__(self, role: str, net: nn.Sequential, in_channels: int, out_channels: int,
                 stride: int, multiple: int, phase: str, clamp_output: bool = False):
        super().__init__()
        self.role = role
        self.net = net
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.stride = stride
        self.multiple = multiple
        self.clamp_output = clamp_output
        set_phase(self, phase)

    @property
    def downsamples(self) -> bool:
        return self.role in ("analysis", "hyper_analysis")

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.dim() != 4 or x.shape[1] != self.in_channels:
            raise ContractError(f"{self.role}: expected (B, {self.in_channels}, H, W), got {tuple(x.shape)}")
        h, w = x.shape[-2:]
        if h % self.multiple or w % self.multiple:
            raise PaddingRequiredError(
                f"{self.role}: {h}x{w} input is not a multiple of {self.multiple}; pad first"
            )
        out = self.net(x)
        if self.clamp_output and not self.training:
            out = out.clamp(0.0, 1.0)
        return out

    def resampling_channels(self) -> list[int]:
        """Channel counts at the boundaries of the stride-changing layers."""
        chans = []
        for m in self.net.modules():
            if isinstance(m, (nn.Conv2d, nn.ConvTranspose2d)) and m.stride[0] != 1:
                if not chans:
                    chans.append(m.in_channels)
                chans.append(m.out_channels)
        return chans


def _stage_widths(cfg: ModelConfig) -> list[int]:
    return list(cfg.analysis_depths) + [cfg.latent_depth]


def build_analysis(cfg: ModelConfig) -> TransformHandle:
    widths = _stage_widths(cfg)
    ins = [3] + widths[:-1]
    layers: list[nn.Module] = []
    family = cfg.transform_family
    if family == "conv":
        for i, (a, b) in enumerate(zip(ins, widths)):
            grid = 2 ** (i + 1)
            layers.append(place(conv(a, b), grid))
            if i < 3:
                layers.append(place(GDN(b), grid))
    elif family == "elic":
        for i, (a, b) in enumerate(zip(ins, widths)):
            grid = 2 ** (i + 1)
            layers.append(place(conv(a, b), grid))
            if i < 3:
                layers += [place(ResidualBottleneck(b), grid) for _ in range(cfg.num_residual_blocks)]
            if i in (1, 3):
                layers.append(place(AttentionBlock(b), grid))
    elif family == "swint":
        for i, (a, b) in enumerate(zip(ins, widths)):
            grid = 2 ** (i + 1)
            layers.append(place(patch_merge(a, b), grid))
            layers.append(place(SwinStage(b, cfg.swint_stage_depths[i], cfg.swint_window, cfg.swint_head_dim), grid))
    else:
        raise ConfigError(f"unknown transform family {family!r}")
    return TransformHandle("analysis", nn.Sequential(*layers), 3, cfg.latent_depth,
                           LATENT_STRIDE, TOTAL_STRIDE, "encode_only")


def build_synthesis(cfg: ModelConfig) -> TransformHandle:
    widths = _stage_widths(cfg)[::-1]  # [C_y, d3, d2, d1]
    outs = widths[1:] + [3]
    layers: list[nn.Module] = []
    family = cfg.transform_family
    if family == "conv":
        for i, (a, b) in enumerate(zip(widths, outs)):
            grid = 2 ** (3 - i)
            layers.append(place(deconv(a, b), grid))
            if i < 3:
                layers.append(place(GDN(b, inverse=True), grid))
    elif family == "elic":
        for i, (a, b) in enumerate(zip(widths, outs)):
            grid = 2 ** (3 - i)
            if i in (0, 2):
                layers.append(place(AttentionBlock(a), grid * 2))
            layers.append(place(deconv(a, b), grid))
            if i < 3:
                layers += [place(ResidualBottleneck(b), grid) for _ in range(cfg.num_residual_blocks)]
    elif family == "swint":
        depths = cfg.swint_stage_depths[::-1]
        for i, (a, b) in enumerate(zip(widths, outs)):
            grid = 2 ** (3 - i)
            layers.append(place(SwinStage(a, depths[i], cfg.swint_window, cfg.swint_head_dim), grid * 2))
            layers.append(place(patch_split(a, b), grid))
    else:
        raise ConfigError(f"unknown transform family {family!r}")
    return TransformHandle("synthesis", nn.Sequential(*layers), cfg.latent_depth, 3,
                           LATENT_STRIDE, 1, "decode_only", clamp_output=True)


def build_hyper_analysis(cfg: ModelConfig) -> TransformHandle:
    cy, cz = cfg.latent_depth, cfg.hyper_depth
    if cfg.hyper_family == "conv":
        layers = [
            place(conv(cy, cz, 3, 1), 16), nn.ReLU(),
            place(conv(cz, cz), 32), nn.ReLU(),
            place(conv(cz, cz), 64),
        ]
    elif cfg.hyper_family == "swint":
        d0, d1 = cfg.hyper_stage_depths
        layers = [
            place(patch_merge(cy, cz), 32),
            place(SwinStage(cz, d0, cfg.swint_window, cfg.swint_head_dim), 32),
            place(patch_merge(cz, cz), 64),
            place(SwinStage(cz, d1, cfg.swint_window, cfg.swint_head_dim), 64),
        ]
    else:
        raise ConfigError(f"unknown hyper family {cfg.hyper_family!r}")
    return TransformHandle("hyper_analysis", nn.Sequential(*layers), cy, cz,
                           TOTAL_STRIDE // LATENT_STRIDE, TOTAL_STRIDE // LATENT_STRIDE, "encode_only")


def build_hyper_synthesis(cfg: ModelConfig) -> TransformHandle:
    """Hyper-synthesis emitting C_u = 2 * C_y channels of entropy-parameter support.

    It runs on both sides of the codec (the encoder needs the same entropy
    parameters), so it is phase ``shared``.
    """
    cz, cu = cfg.hyper_depth, cfg.num_params_channels
    if cfg.hyper_family == "conv":
        mid = cz * 3 // 2
        layers = [
            place(deconv(cz, cz), 32), nn.ReLU(),
            place(deconv(cz, mid), 16), nn.ReLU(),
            place(conv(mid, cu, 3, 1), 16),
        ]
    elif cfg.hyper_family == "swint":
        d0, d1 = cfg.hyper_stage_depths[::-1]
        layers = [
            place(SwinStage(cz, d0, cfg.swint_window, cfg.swint_head_dim), 64),
            place(patch_split(cz, cz), 32),
            place(SwinStage(cz, d1, cfg.swint_window, cfg.swint_head_dim), 32),
            place(patch_split(cz, cu), 16),
        ]
    else:
        raise ConfigError(f"unknown hyper family {cfg.hyper_family!r}")
    return TransformHandle("hyper_synthesis", nn.Sequential(*layers), cz, cu,
                           TOTAL_STRIDE // LATENT_STRIDE, 1, "shared")
