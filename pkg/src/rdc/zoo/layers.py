"""Building blocks shared by the transform families.

Every block that owns parameters is tagged at construction time with the
downsampling factor of the grid it runs on (``rdc_grid``) so the layer
inventory, and hence FLOPs, can be derived without running the model.
"""

from __future__ import annotations

import torch
import torch.nn as nn
import torch.nn.functional as F


def conv(in_ch: int, out_ch: int, kernel_size: int = 5, stride: int = 2) -> nn.Conv2d:
    return nn.Conv2d(in_ch, out_ch, kernel_size, stride=stride, padding=kernel_size // 2)


def deconv(in_ch: int, out_ch: int, kernel_size: int = 5, stride: int = 2) -> nn.ConvTranspose2d:
    return nn.ConvTranspose2d(
        in_ch, out_ch, kernel_size, stride=stride,
        padding=kernel_size // 2, output_padding=stride - 1,
    )


def place(module: nn.Module, grid: int) -> nn.Module:
    """Tag ``module`` and all untagged submodules with their grid factor."""
    for m in module.modules():
        if not hasattr(m, "rdc_grid"):
            m.rdc_grid = grid
    return module


def set_phase(module: nn.Module, phase: str) -> nn.Module:
    for m in module.modules():
        m.rdc_phase = phase
    return module


class GDN(nn.Module):
    r"""Generalized divisive normalization.

    ``y_i = x_i / sqrt(beta_i + sum_j gamma_ij x_j^2)``; the inverse variant
    multiplies instead. beta and gamma are stored as square roots offset by a
    small pedestal and clamped, which keeps them non-negative.
    """

    pedestal = 2.0 ** -18

    def __init__(self, channels: int, inverse: bool = False, beta_min: float = 1e-6, gamma_init: float = 0.1):
        super().__init__()
        self.inverse = inverse
        self.beta_bound = (beta_min + self.pedestal) ** 0.5
        self.gamma_bound = self.pedestal ** 0.5
        self.beta = nn.Parameter(torch.sqrt(torch.ones(channels) + self.pedestal))
        self.gamma = nn.Parameter(torch.sqrt(gamma_init * torch.eye(channels) + self.pedestal))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        c = x.shape[1]
        beta = torch.clamp(self.beta, min=self.beta_bound) ** 2 - self.pedestal
        gamma = torch.clamp(self.gamma, min=self.gamma_bound) ** 2 - self.pedestal
        norm = F.conv2d(x * x, gamma.view(c, c, 1, 1), beta)
        if self.inverse:
            return x * torch.sqrt(norm)
        return x * torch.rsqrt(norm)


class ResidualBottleneck(nn.Module):
    """1x1 -> 3x3 -> 1x1 bottleneck with identity skip."""

    def __init__(self, channels: int):
        super().__init__()
        mid = channels // 2
        self.body = nn.Sequential(
            nn.Conv2d(channels, mid, 1),
            nn.ReLU(),
            nn.Conv2d(mid, mid, 3, padding=1),
            nn.ReLU(),
            nn.Conv2d(mid, channels, 1),
        )

    def forward(self, x):
        return x + self.body(x)


class AttentionBlock(nn.Module):
    """Simplified residual attention: ``x + trunk(x) * sigmoid(mask(x))``.

    No non-local branch.
    """

    def __init__(self, channels: int):
        super().__init__()
        self.trunk = nn.Sequential(*(ResidualBottleneck(channels) for _ in range(3)))
        self.mask = nn.Sequential(
            *(ResidualBottleneck(channels) for _ in range(3)),
            nn.Conv2d(channels, channels, 1),
        )

    def forward(self, x):
        return x + self.trunk(x) * torch.sigmoid(self.mask(x))


class WindowAttention(nn.Module):
    """Multi-head self-attention within non-overlapping windows.

    Owns the relative position bias table; ``qkv`` and ``proj`` are plain
    linear layers tagged so the inventory prices them as projections.
    """

    def __init__(self, dim: int, window: int, num_heads: int):
        super().__init__()
        self.dim = dim
        self.window = window
        self.num_heads = num_heads
        self.scale = (dim // num_heads) ** -0.5
        self.relative_position_bias_table = nn.Parameter(torch.zeros((2 * window - 1) ** 2, num_heads))
        nn.init.trunc_normal_(self.relative_position_bias_table, std=0.02)

        coords = torch.stack(torch.meshgrid(torch.arange(window), torch.arange(window), indexing="ij")).flatten(1)
        rel = (coords[:, :, None] - coords[:, None, :]).permute(1, 2, 0) + (window - 1)
        self.register_buffer("relative_position_index", rel[..., 0] * (2 * window - 1) + rel[..., 1], persistent=False)

        self.qkv = nn.Linear(dim, 3 * dim)
        self.qkv.rdc_kind = "attention_qkv"
        self.proj = nn.Linear(dim, dim)

    def forward(self, x: torch.Tensor, mask: torch.Tensor | None = None) -> torch.Tensor:
        # x: (num_windows*B, T, C)
        bw, t, c = x.shape
        qkv = self.qkv(x).reshape(bw, t, 3, self.num_heads, c // self.num_heads).permute(2, 0, 3, 1, 4)
        q, k, v = qkv[0], qkv[1], qkv[2]
        attn = (q * self.scale) @ k.transpose(-2, -1)
        bias = self.relative_position_bias_table[self.relative_position_index.view(-1)]
        attn = attn + bias.view(t, t, -1).permute(2, 0, 1).unsqueeze(0)
        if mask is not None:
            nw = mask.shape[0]
            attn = attn.view(bw // nw, nw, self.num_heads, t, t) + mask.unsqueeze(1).unsqueeze(0)
            attn = attn.view(-1, self.num_heads, t, t)
        attn = attn.softmax(dim=-1)
        x = (attn @ v).transpose(1, 2).reshape(bw, t, c)
        return self.proj(x)


def _window_partition(x, w):
    b, h, wd, c = x.shape
    x = x.view(b, h // w, w, wd // w, w, c)
    return x.permute(0, 1, 3, 2, 4, 5).reshape(-1, w * w, c)


def _window_reverse(windows, w, h, wd):
    b = windows.shape[0] // ((h // w) * (wd // w))
    x = windows.view(b, h // w, wd // w, w, w, -1)
    return x.permute(0, 1, 3, 2, 4, 5).reshape(b, h, wd, -1)


class SwinBlock(nn.Module):
    def __init__(self, dim: int, num_heads: int, window: int, shifted: bool, mlp_ratio: int = 4):
        super().__init__()
        self.window = window
        self.shifted = shifted
        self.norm1 = nn.LayerNorm(dim)
        self.attn = WindowAttention(dim, window, num_heads)
        self.norm2 = nn.LayerNorm(dim)
        self.mlp = nn.Sequential(nn.Linear(dim, mlp_ratio * dim), nn.GELU(), nn.Linear(mlp_ratio * dim, dim))

    def _shift_mask(self, hp, wp, shift, device):
        w = self.window
        img = torch.zeros(1, hp, wp, 1, device=device)
        cnt = 0
        for hs in (slice(0, -w), slice(-w, -shift), slice(-shift, None)):
            for ws in (slice(0, -w), slice(-w, -shift), slice(-shift, None)):
                img[:, hs, ws, :] = cnt
                cnt += 1
        win = _window_partition(img, w).squeeze(-1)
        mask = win.unsqueeze(1) - win.unsqueeze(2)
        return mask.masked_fill(mask != 0, -100.0).masked_fill(mask == 0, 0.0)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        # x: (B, H, W, C)
        b, h, wd, c = x.shape
        w = self.window
        shortcut = x
        x = self.norm1(x)
        pad_h, pad_w = (-h) % w, (-wd) % w
        if pad_h or pad_w:
            x = F.pad(x, (0, 0, 0, pad_w, 0, pad_h))
        hp, wp = h + pad_h, wd + pad_w
        shift = w // 2 if (self.shifted and min(hp, wp) > w) else 0
        mask = None
        if shift:
            x = torch.roll(x, shifts=(-shift, -shift), dims=(1, 2))
            mask = self._shift_mask(hp, wp, shift, x.device).to(x.dtype)
        windows = self.attn(_window_partition(x, w), mask)
        x = _window_reverse(windows, w, hp, wp)
        if shift:
            x = torch.roll(x, shifts=(shift, shift), dims=(1, 2))
        x = shortcut + x[:, :h, :wd, :]
        return x + self.mlp(self.norm2(x))


class SwinStage(nn.Module):
    """A run of Swin blocks with alternating shifted windows; NCHW in and out."""

    def __init__(self, dim: int, depth: int, window: int, head_dim: int):
        super().__init__()
        heads = dim // head_dim if dim % head_dim == 0 and dim >= head_dim else 1
        self.blocks = nn.ModuleList(SwinBlock(dim, heads, window, shifted=i % 2 == 1) for i in range(depth))

    def forward(self, x):
        if not len(self.blocks):
            return x
        x = x.permute(0, 2, 3, 1)
        for blk in self.blocks:
            x = blk(x)
        return x.permute(0, 3, 1, 2).contiguous()


def patch_merge(in_ch: int, out_ch: int) -> nn.Conv2d:
    """2x2 space-to-depth followed by a linear map, as one 2x2 stride-2 conv."""
    return nn.Conv2d(in_ch, out_ch, 2, stride=2)


def patch_split(in_ch: int, out_ch: int) -> nn.ConvTranspose2d:
    """Linear map followed by depth-to-space, as one 2x2 stride-2 transposed conv."""
    return nn.ConvTranspose2d(in_ch, out_ch, 2, stride=2)
