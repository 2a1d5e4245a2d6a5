"""End-to-end learned image compression model."""

from __future__ import annotations

from typing import Callable

import torch
import torch.nn as nn

from .codec.quantize import quantize
from .config import ModelConfig
from .entropy import (
    CharmEntropyModel,
    DeepFactorizedPrior,
    EntropyParams,
    SliceContext,
    factorized_bits,
    gaussian_bits,
    params_from_support,
)
from .zoo import build_analysis, build_hyper_analysis, build_hyper_synthesis, build_synthesis
from .zoo.layers import place, set_phase

# (slice index or None for the whole latent, params) -> quantized latent
SliceCoder = Callable[[int | None, EntropyParams], torch.Tensor]


class CompressionModel(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        self.g_a = build_analysis(cfg)
        self.g_s = build_synthesis(cfg)
        self.h_a = build_hyper_analysis(cfg)
        self.h_s = build_hyper_synthesis(cfg)
        self.prior = set_phase(place(DeepFactorizedPrior(cfg.hyper_depth), 64), "shared")
        self.charm = CharmEntropyModel(cfg) if cfg.entropy_family == "charm" else None

    @property
    def slices(self) -> int:
        return self.charm.num_slices if self.charm is not None else 1

    def latent_pass(self, u: torch.Tensor, code: SliceCoder):
        """Run the (possibly autoregressive) latent model.

        ``code`` turns each slice's params into its quantized values; it is
        where training adds noise, evaluation rounds, and the codec reads or
        writes symbols. Returns the refined latent fed to synthesis and the
        list of ``(quantized, params)`` per slice.
        """
        if self.charm is None:
            params = params_from_support(u)
            y_q = code(None, params)
            return y_q, [(y_q, params)]
        feats = self.charm.features(u)
        refined: list[torch.Tensor] = []
        coded = []
        for i in range(self.charm.num_slices):
            ctx = SliceContext(i, feats[i], list(refined))
            params = self.charm.slice_params(ctx)
            y_q = code(i, params)
            lrp = self.charm.slice_lrp(ctx, y_q)
            refined.append(self.charm.merge(i, y_q, lrp))
            coded.append((y_q, params))
        return torch.cat(refined, dim=1), coded

    def slice_of(self, y: torch.Tensor, index: int | None) -> torch.Tensor:
        if index is None:
            return y
        s = self.cfg.slice_depth
        return y[:, index * s:(index + 1) * s]

    def forward(self, x: torch.Tensor, mode: str = "noise", generator: torch.Generator | None = None) -> dict:
        """Rate estimate and reconstruction.

        ``mode='noise'`` is the differentiable training proxy; ``'round'``
        gives the evaluation-mode estimate that matches what the codec sends.
        """
        y = self.g_a(x)
        z = self.h_a(y)
        z_q = quantize(z, None, mode, generator)
        z_bits, z_p = factorized_bits(z_q, self.prior.logits)
        u = self.h_s(z_q)

        def code(index, params):
            y_i = self.slice_of(y, index)
            return quantize(y_i, params.mean, mode, generator)

        y_hat, coded = self.latent_pass(u, code)
        y_bits = sum(gaussian_bits(y_q, params)[0] for y_q, params in coded)
        x_hat = self.g_s(y_hat)
        num_pixels = x.shape[0] * x.shape[2] * x.shape[3]
        return {
            "x_hat": x_hat,
            "y": y,
            "z": z,
            "y_bits": y_bits,
            "z_bits": z_bits,
            "bpp": (y_bits + z_bits) / num_pixels,
            "coded": coded,
        }


def build_model(cfg: ModelConfig, seed: int | None = None) -> CompressionModel:
    """Construct a model; a seed makes the initial parameters reproducible."""
    if seed is None:
        return CompressionModel(cfg)
    state = torch.random.get_rng_state()
    try:
        torch.manual_seed(seed)
        return CompressionModel(cfg)
    finally:
        torch.random.set_rng_state(state)


def count_parameters(module: nn.Module) -> int:
    return sum(p.numel() for p in module.parameters() if p.requires_grad)
