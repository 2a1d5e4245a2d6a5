"""Mean-scale Gaussian conditional for the main latent."""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn.functional as F

from ..errors import ContractError

SCALE_FLOOR = 1e-6
P_MIN = 2.0 ** -16


@dataclass
class EntropyParams:
    mean: torch.Tensor
    scale: torch.Tensor

    def __post_init__(self):
        if self.mean.shape != self.scale.shape:
            raise ContractError(f"mean {tuple(self.mean.shape)} and scale {tuple(self.scale.shape)} differ")

    @classmethod
    def from_raw(cls, mean: torch.Tensor, raw_scale: torch.Tensor) -> "EntropyParams":
        """Map an unconstrained network output to a scale >= SCALE_FLOOR."""
        return cls(mean, torch.clamp(F.softplus(raw_scale), min=SCALE_FLOOR))


def std_normal_cdf(x: torch.Tensor) -> torch.Tensor:
    return torch.special.ndtr(x)


def gaussian_likelihood(y: torch.Tensor, mean: torch.Tensor, scale: torch.Tensor) -> torch.Tensor:
    """Probability of the unit bin around ``y``; unfloored."""
    v = torch.abs(y - mean)
    # both terms on the lower tail, where ndtr keeps relative precision
    return std_normal_cdf((0.5 - v) / scale) - std_normal_cdf((-0.5 - v) / scale)


def gaussian_bits(y_q: torch.Tensor, params: EntropyParams, p_min: float = P_MIN):
    """Bits of ``y_q`` under N(mean, scale) discretized to unit bins.

    Returns ``(total_bits, probabilities)`` with probabilities floored at
    ``p_min``.
    """
    if y_q.shape != params.mean.shape:
        raise ContractError(f"latent {tuple(y_q.shape)} vs params {tuple(params.mean.shape)}")
    p = torch.clamp(gaussian_likelihood(y_q, params.mean, params.scale), min=p_min)
    return -torch.log2(p).sum(), p
