"""Single-pass mean-scale hyperprior."""

import torch

from .gaussian import EntropyParams


def params_from_support(u: torch.Tensor) -> EntropyParams:
    """Split hyper-synthesis output into per-element mean and scale."""
    mean, raw_scale = u.chunk(2, dim=1)
    return EntropyParams.from_raw(mean, raw_scale)


def hyperprior_params(z_q: torch.Tensor, hyper_synthesis) -> EntropyParams:
    """Entropy parameters for the whole latent from the hyper-latent alone."""
    return params_from_support(hyper_synthesis(z_q))
