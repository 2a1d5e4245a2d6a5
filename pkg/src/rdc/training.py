"""Desk-scale rate-distortion training."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .config import ModelConfig
from .errors import IngestionError, NumericError, TrainingError
from .model import CompressionModel, build_model

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff", ".ppm"}
CHECKPOINT_VERSION = 1
LOG_HEADER = ("step", "bpp", "mse", "loss")


def rd_loss(bpp_estimate, mse_255, lmbda: float):
    """``bpp + lambda * mse`` with MSE measured on the 0-255 scale."""
    return bpp_estimate + lmbda * mse_255


def mse_255(x: torch.Tensor, x_hat: torch.Tensor) -> torch.Tensor:
    return torch.mean((x - x_hat) ** 2) * 255.0 ** 2


def load_images(dataset_dir, min_size: int = 0) -> list[np.ndarray]:
    paths = sorted(p for p in Path(dataset_dir).iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    images = []
    for p in paths:
        arr = np.asarray(Image.open(p).convert("RGB"))
        if min(arr.shape[:2]) >= min_size:
            images.append(arr)
    if not images:
        raise IngestionError(f"no RGB images of at least {min_size}x{min_size} in {dataset_dir}")
    return images


class CropSampler:
    """Random crops with random horizontal flips, driven by one numpy RNG."""

    def __init__(self, images: list[np.ndarray], crop: int, rng: np.random.Generator):
        self.images = images
        self.crop = crop
        self.rng = rng

    def batch(self, size: int) -> torch.Tensor:
        out = np.empty((size, self.crop, self.crop, 3), dtype=np.uint8)
        for b in range(size):
            img = self.images[self.rng.integers(len(self.images))]
            top = self.rng.integers(img.shape[0] - self.crop + 1)
            left = self.rng.integers(img.shape[1] - self.crop + 1)
            patch = img[top:top + self.crop, left:left + self.crop]
            if self.rng.random() < 0.5:
                patch = patch[:, ::-1]
            out[b] = patch
        return torch.from_numpy(out).permute(0, 3, 1, 2).float() / 255.0


@dataclass
class TrainState:
    cfg: ModelConfig
    model: CompressionModel
    optimizer: torch.optim.Optimizer
    data_rng: np.random.Generator
    noise_gen: torch.Generator
    total_steps: int
    batch_size: int
    crop: int
    base_lr: float
    seed: int
    step: int = 0
    ema_bpp: float = float("nan")
    ema_mse: float = float("nan")
    log: list[tuple] = field(default_factory=list)

    @property
    def lmbda(self) -> float:
        return self.cfg.lmbda


def learning_rate(step: int, total_steps: int, base_lr: float) -> float:
    """Constant, then 10x lower for the final 10% of steps."""
    return base_lr if step < math.ceil(0.9 * total_steps) else base_lr / 10


def init_state(cfg: ModelConfig, steps: int, batch_size: int, seed: int, crop: int = 256,
               lr: float = 1e-4) -> TrainState:
    model = build_model(cfg, seed=seed)
    model.train()
    opt = torch.optim.Adam(model.parameters(), lr=lr)
    gen = torch.Generator().manual_seed(seed + 1)
    return TrainState(cfg, model, opt, np.random.default_rng(seed), gen, steps, batch_size, crop, lr, seed)


def train_step(state: TrainState, x: torch.Tensor) -> tuple[float, float, float]:
    model, opt = state.model, state.optimizer
    for group in opt.param_groups:
        group["lr"] = learning_rate(state.step, state.total_steps, state.base_lr)
    try:
        out = model(x, mode="noise", generator=state.noise_gen)
    except NumericError as exc:
        raise TrainingError(f"non-finite values at step {state.step}: {exc}") from exc
    mse = mse_255(x, out["x_hat"])
    loss = rd_loss(out["bpp"], mse, state.lmbda)
    values = (float(out["bpp"].detach()), float(mse.detach()), float(loss.detach()))
    if not all(math.isfinite(v) for v in values):
        raise TrainingError(
            f"non-finite loss at step {state.step}: bpp={values[0]} mse={values[1]} loss={values[2]}"
        )
    opt.zero_grad(set_to_none=True)
    loss.backward()
    torch.nn.utils.clip_grad_norm_(model.parameters(), 1.0)
    opt.step()
    state.step += 1
    a = 0.99
    state.ema_bpp = values[0] if math.isnan(state.ema_bpp) else a * state.ema_bpp + (1 - a) * values[0]
    state.ema_mse = values[1] if math.isnan(state.ema_mse) else a * state.ema_mse + (1 - a) * values[1]
    state.log.append((state.step, *values))
    return values


def run(state: TrainState, images: list[np.ndarray], stop_at: int | None = None,
        log_every: int = 0) -> TrainState:
    """Advance ``state`` to ``stop_at`` (default: its total step count)."""
    sampler = CropSampler(images, state.crop, state.data_rng)
    end = state.total_steps if stop_at is None else min(stop_at, state.total_steps)
    state.model.train()
    while state.step < end:
        bpp, mse, loss = train_step(state, sampler.batch(state.batch_size))
        if log_every and state.step % log_every == 0:
            log.info("step %d bpp %.4f mse %.2f loss %.4f", state.step, bpp, mse, loss)
    state.model.eval()
    return state


def train(cfg: ModelConfig, dataset_dir, steps: int, batch_size: int = 8, seed: int = 0, *,
          crop: int = 256, lr: float = 1e-4, stop_at: int | None = None, images=None,
          log_every: int = 0) -> TrainState:
    """Train ``cfg`` for ``steps`` optimizer updates on random crops.

    ``images`` may be passed pre-loaded to skip reading ``dataset_dir``.
    ``stop_at`` halts early (the LR schedule still follows ``steps``), which
    together with checkpoints allows resuming.
    """
    if images is None:
        images = load_images(dataset_dir, crop)
    elif not any(min(im.shape[:2]) >= crop for im in images):
        raise IngestionError(f"no images of at least {crop}x{crop}")
    else:
        images = [im for im in images if min(im.shape[:2]) >= crop]
    state = init_state(cfg, steps, batch_size, seed, crop, lr)
    return run(state, images, stop_at, log_every)


def resume(checkpoint_dir, dataset_dir=None, *, images=None, stop_at: int | None = None,
           log_every: int = 0) -> TrainState:
    state = load_checkpoint(checkpoint_dir)
    if images is None:
        images = load_images(dataset_dir, state.crop)
    else:
        images = [im for im in images if min(im.shape[:2]) >= state.crop]
    return run(state, images, stop_at, log_every)


def write_log(rows, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(LOG_HEADER)
        for step, bpp, mse, loss in rows:
            w.writerow([step, repr(bpp), repr(mse), repr(loss)])


def read_log(path) -> list[tuple]:
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        return [(int(r["step"]), float(r["bpp"]), float(r["mse"]), float(r["loss"])) for r in reader]


def save_checkpoint(state: TrainState, directory) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    (d / "VERSION").write_text(f"{CHECKPOINT_VERSION}\n")
    state.cfg.save(d / "config.txt")
    torch.save(state.model.state_dict(), d / "params.pt")
    torch.save(
        {"optimizer": state.optimizer.state_dict(), "noise_gen": state.noise_gen.get_state()},
        d / "optim.pt",
    )
    meta = {
        "step": state.step,
        "total_steps": state.total_steps,
        "batch_size": state.batch_size,
        "crop": state.crop,
        "base_lr": state.base_lr,
        "seed": state.seed,
        "ema_bpp": state.ema_bpp,
        "ema_mse": state.ema_mse,
        "data_rng": state.data_rng.bit_generator.state,
    }
    (d / "state.json").write_text(json.dumps(meta, indent=1))
    write_log(state.log, d / "metrics.csv")
    return d


def load_model(directory) -> CompressionModel:
    d = Path(directory)
    cfg = ModelConfig.load(d / "config.txt")
    model = CompressionModel(cfg)
    model.load_state_dict(torch.load(d / "params.pt", weights_only=True))
    model.eval()
    return model


def load_checkpoint(directory) -> TrainState:
    d = Path(directory)
    version = int((d / "VERSION").read_text().strip())
    if version != CHECKPOINT_VERSION:
        raise IngestionError(f"checkpoint version {version} unsupported")
    meta = json.loads((d / "state.json").read_text())
    model = load_model(d)
    model.train()
    opt = torch.optim.Adam(model.parameters(), lr=meta["base_lr"])
    extra = torch.load(d / "optim.pt", weights_only=True)
    opt.load_state_dict(extra["optimizer"])
    gen = torch.Generator()
    gen.set_state(extra["noise_gen"])
    rng = np.random.default_rng()
    rng.bit_generator.state = meta["data_rng"]
    return TrainState(
        model.cfg, model, opt, rng, gen, meta["total_steps"], meta["batch_size"], meta["crop"],
        meta["base_lr"], meta["seed"], meta["step"], meta["ema_bpp"], meta["ema_mse"],
        read_log(d / "metrics.csv"),
    )
