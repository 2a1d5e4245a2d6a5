"""Deep factorized prior for the hyper-latent.

Each channel has its own learned univariate CDF, parameterized as a small
monotone network of 1-d affine maps (softplus-positive matrices) with tanh
gated nonlinearities, followed by a sigmoid.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from ..errors import NumericError
from .gaussian import P_MIN

LogitsFn = Callable[[torch.Tensor], torch.Tensor]


class DeepFactorizedPrior(nn.Module):
    rdc_kind = "density"

    def __init__(self, channels: int, filters=(3, 3, 3), init_scale: float = 10.0):
        super().__init__()
        self.channels = channels
        dims = (1,) + tuple(filters) + (1,)
        scale = init_scale ** (1.0 / (len(filters) + 1))
        self.matrices = nn.ParameterList()
        self.biases = nn.ParameterList()
        self.factors = nn.ParameterList()
        for i in range(len(filters) + 1):
            init = math.log(math.expm1(1.0 / scale / dims[i + 1]))
            self.matrices.append(nn.Parameter(torch.full((channels, dims[i + 1], dims[i]), init)))
            self.biases.append(nn.Parameter(torch.empty(channels, dims[i + 1], 1).uniform_(-0.5, 0.5)))
            if i < len(filters):
                self.factors.append(nn.Parameter(torch.zeros(channels, dims[i + 1], 1)))

    def _cumulative(self, v: torch.Tensor) -> torch.Tensor:
        # v: (C, 1, n)
        x = v
        for i, (m, b) in enumerate(zip(self.matrices, self.biases)):
            x = torch.matmul(F.softplus(m.to(v.dtype)), x) + b.to(v.dtype)
            if i < len(self.factors):
                x = x + torch.tanh(self.factors[i].to(v.dtype)) * torch.tanh(x)
        return x

    def logits(self, z: torch.Tensor) -> torch.Tensor:
        """Cumulative logits at every element of ``z`` (B, C, H, W)."""
        b, c, h, w = z.shape
        v = z.permute(1, 0, 2, 3).reshape(c, 1, -1)
        out = self._cumulative(v)
        return out.reshape(c, b, h, w).permute(1, 0, 2, 3)

    def channel_logits(self, grid: torch.Tensor) -> torch.Tensor:
        """Cumulative logits of every channel at the 1-d points ``grid`` -> (C, n)."""
        v = grid.reshape(1, 1, -1).expand(self.channels, 1, -1)
        return self._cumulative(v)[:, 0, :]

    @torch.no_grad()
    def pmf_table(self, tail_mass: float, max_radius: int = 255):
        """Per-channel truncated pmf over integers, in float64.

        Returns a list of ``(lo, pmf)`` where ``pmf`` covers ``lo..lo+len-1``
        and leaves at most ``tail_mass / 2`` on each side.
        """
        ks = torch.arange(-max_radius, max_radius + 1, dtype=torch.float64)
        upper = self.channel_logits(ks + 0.5)
        lower = self.channel_logits(ks - 0.5)
        pmf = _interval_prob(lower, upper).numpy()
        below = torch.sigmoid(lower).numpy()   # mass strictly below k
        above = torch.sigmoid(-upper).numpy()  # mass strictly above k
        half = tail_mass / 2
        tables = []
        for c in range(self.channels):
            under = np.nonzero(below[c] <= half)[0]
            over = np.nonzero(above[c] <= half)[0]
            first = int(under[-1]) if len(under) else 0
            last = int(over[0]) if len(over) else len(ks) - 1
            if last < first:
                first = last = int(np.argmax(pmf[c]))
            tables.append((int(ks[first]), pmf[c, first:last + 1].copy()))
        return tables


def _interval_prob(lower: torch.Tensor, upper: torch.Tensor) -> torch.Tensor:
    # evaluate on the side of the distribution where sigmoid is not saturated
    sign = torch.where(lower + upper > 0, -1.0, 1.0).to(lower.dtype).detach()
    return torch.abs(torch.sigmoid(sign * upper) - torch.sigmoid(sign * lower))


def factorized_bits(z_q: torch.Tensor, logits_fn: LogitsFn, p_min: float = P_MIN):
    """Bits of ``z_q`` under a factorized prior given by its cumulative logits.

    ``logits_fn`` maps a tensor shaped like ``z_q`` to the CDF logits at each
    element (channel-aware). Returns ``(total_bits, probabilities)``; the
    total is differentiable.
    """
    if not torch.isfinite(z_q).all():
        raise NumericError("non-finite values in hyper-latent")
    p = _interval_prob(logits_fn(z_q - 0.5), logits_fn(z_q + 0.5))
    p = torch.clamp(p, min=p_min)
    return -torch.log2(p).sum(), p
