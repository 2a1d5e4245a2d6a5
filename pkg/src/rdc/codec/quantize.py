import torch


def quantize(y: torch.Tensor, means: torch.Tensor | None = None, mode: str = "round",
             generator: torch.Generator | None = None) -> torch.Tensor:
    """Quantize a latent.

    ``noise`` adds i.i.d. U(-0.5, 0.5) (the training proxy); ``round`` rounds
    the mean-centered residual, ties to even, and adds the mean back.
    """
    if mode == "noise":
        u = torch.rand(y.shape, generator=generator, dtype=y.dtype, device=y.device)
        return y + (u - 0.5)
    if mode == "round":
        if means is None:
            return torch.round(y)
        return torch.round(y - means) + means
    raise ValueError(f"unknown quantization mode {mode!r}")


def symbols_of(y: torch.Tensor, means: torch.Tensor | None = None) -> torch.Tensor:
    """Integer symbols coded for ``y`` (mean-centered residuals)."""
    r = y if means is None else y - means
    return torch.round(r).to(torch.int64)
