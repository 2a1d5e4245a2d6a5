"""Declarative model configuration and its identity hash.

A config is stored as a flat ``key = value`` text document with sorted keys.
The identity hash is the first 8 bytes of the SHA-256 of that document, read
as a little-endian u64 so the bytes in a bitstream header equal the digest
prefix.
"""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

from .errors import ConfigError

TRANSFORM_FAMILIES = ("conv", "elic", "swint")
ENTROPY_FAMILIES = ("hyperprior", "charm")
HYPER_FAMILIES = ("conv", "swint")
LRP_MERGES = ("add", "concat_1x1")
HYPER_SPLITS = ("single", "per_slice")

# analysis /16, hyper-analysis a further /4
LATENT_STRIDE = 16
TOTAL_STRIDE = 64


@dataclass(frozen=True)
class ModelConfig:
    transform_family: str = "conv"
    entropy_family: str = "hyperprior"
    hyper_family: str = "conv"
    analysis_depths: tuple[int, ...] = (192, 192, 192)
    latent_depth: int = 192
    hyper_depth: int = 128
    num_residual_blocks: int = 3
    num_slices: int = 10
    lrp_merge: str = "add"
    hyper_split: str = "single"
    swint_window: int = 8
    swint_stage_depths: tuple[int, ...] = (2, 2, 6, 2)
    hyper_stage_depths: tuple[int, ...] = (2, 2)
    swint_head_dim: int = 32
    charm_hidden: tuple[int, ...] = (224, 128)
    lmbda: float = 0.0125

    def __post_init__(self):
        for name in ("analysis_depths", "swint_stage_depths", "hyper_stage_depths", "charm_hidden"):
            value = getattr(self, name)
            if not isinstance(value, tuple):
                object.__setattr__(self, name, tuple(int(v) for v in value))
        self.validate()

    def validate(self) -> None:
        def choice(name, options):
            value = getattr(self, name)
            if value not in options:
                raise ConfigError(f"{name}={value!r}; expected one of {options}")

        choice("transform_family", TRANSFORM_FAMILIES)
        choice("entropy_family", ENTROPY_FAMILIES)
        choice("hyper_family", HYPER_FAMILIES)
        choice("lrp_merge", LRP_MERGES)
        choice("hyper_split", HYPER_SPLITS)

        if len(self.analysis_depths) != 3:
            raise ConfigError("analysis_depths needs exactly 3 channel counts")
        if len(self.swint_stage_depths) != 4:
            raise ConfigError("swint_stage_depths needs 4 entries")
        if len(self.hyper_stage_depths) != 2:
            raise ConfigError("hyper_stage_depths needs 2 entries")
        if len(self.charm_hidden) != 2:
            raise ConfigError("charm_hidden needs 2 entries")
        positive = (
            list(self.analysis_depths)
            + list(self.charm_hidden)
            + [self.latent_depth, self.hyper_depth, self.num_slices, self.swint_window, self.swint_head_dim]
        )
        if any(v <= 0 for v in positive):
            raise ConfigError("channel counts, slices and window must be positive")
        if self.num_residual_blocks < 0 or any(d < 0 for d in self.swint_stage_depths + self.hyper_stage_depths):
            raise ConfigError("block counts must be non-negative")
        if self.lmbda < 0:
            raise ConfigError("lambda must be non-negative")
        if self.entropy_family == "charm" and self.latent_depth % self.num_slices:
            raise ConfigError(
                f"latent_depth {self.latent_depth} not divisible by num_slices {self.num_slices}"
            )
        if self.transform_family == "elic" and any(d % 2 for d in self.analysis_depths + (self.latent_depth,)):
            raise ConfigError("elic residual bottlenecks need even channel counts")

    @property
    def slice_depth(self) -> int:
        return self.latent_depth // self.num_slices

    @property
    def num_params_channels(self) -> int:
        """Channels emitted by the hyper-synthesis (C_u): mean and scale support."""
        return 2 * self.latent_depth

    def replace(self, **changes) -> "ModelConfig":
        return dataclasses.replace(self, **changes)

    # -- serialization ---------------------------------------------------

    def to_document(self) -> str:
        items = {_doc_key(f.name): _format(getattr(self, f.name)) for f in fields(self)}
        return "".join(f"{k} = {items[k]}\n" for k in sorted(items))

    @classmethod
    def from_document(cls, text: str) -> "ModelConfig":
        """Parse a config document.

        A ``preset = <name>`` line selects a base preset; other keys override
        it. Keys absent from the document keep their defaults.
        """
        kinds = {_doc_key(f.name): f for f in fields(cls)}
        base: dict[str, Any] = {}
        values: dict[str, Any] = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key == "preset":
                if value not in _PRESETS:
                    raise ConfigError(f"unknown preset {value!r}")
                base = dict(_PRESETS[value])
                continue
            if key not in kinds:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            values[kinds[key].name] = _parse(kinds[key], value)
        return cls(**{**base, **values})

    @classmethod
    def load(cls, path) -> "ModelConfig":
        return cls.from_document(Path(path).read_text(encoding="utf-8"))

    def save(self, path) -> None:
        Path(path).write_text(self.to_document(), encoding="utf-8")

    def identity_hash(self) -> int:
        digest = hashlib.sha256(self.to_document().encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "little")

    @property
    def label(self) -> str:
        """Architecture family label, e.g. ``ELIC/CHARM:SwinT``."""
        names = {"conv": "Conv", "elic": "ELIC", "swint": "SwinT", "hyperprior": "Hyperprior", "charm": "CHARM"}
        return f"{names[self.transform_family]}/{names[self.entropy_family]}:{names[self.hyper_family]}"


def _doc_key(name: str) -> str:
    return "lambda" if name == "lmbda" else name


def _format(value) -> str:
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(f: dataclasses.Field, text: str):
    try:
        if f.name == "lmbda":
            return float(text)
        if isinstance(f.default, tuple):
            return tuple(int(v) for v in text.split(",") if v.strip())
        if isinstance(f.default, int):
            return int(text)
    except ValueError as exc:
        raise ConfigError(f"bad value for {_doc_key(f.name)}: {text!r}") from exc
    return text


_PRESETS = {
    # frontier model B: ELIC transforms, CHARM, SwinT hyper-transforms, with the
    # reduced residual blocks and [128, 256, 256] depths.
    "model_b": dict(
        transform_family="elic", entropy_family="charm", hyper_family="swint",
        analysis_depths=(128, 256, 256), latent_depth=320, hyper_depth=192,
        num_residual_blocks=2, num_slices=10, lrp_merge="concat_1x1", hyper_split="per_slice",
        swint_window=8, hyper_stage_depths=(2, 2),
    ),
    "elic_charm_swint": dict(
        transform_family="elic", entropy_family="charm", hyper_family="swint",
        analysis_depths=(192, 192, 192), latent_depth=320, hyper_depth=192,
        num_residual_blocks=3, num_slices=10,
    ),
    "swint_hyperprior_conv": dict(
        transform_family="swint", entropy_family="hyperprior", hyper_family="conv",
        analysis_depths=(96, 128, 160), latent_depth=192, hyper_depth=128,
    ),
    "elic_hyperprior_conv": dict(
        transform_family="elic", entropy_family="hyperprior", hyper_family="conv",
        analysis_depths=(192, 192, 192), latent_depth=192, hyper_depth=128,
    ),
    "conv_hyperprior_conv": dict(),
    "conv_charm_conv": dict(entropy_family="charm", latent_depth=320, hyper_depth=192),
    # desk-scale variants
    "toy_conv_hyperprior": dict(
        analysis_depths=(32, 32, 32), latent_depth=32, hyper_depth=16,
        charm_hidden=(32, 32), lmbda=0.0125,
    ),
    "toy_conv_charm": dict(
        entropy_family="charm", analysis_depths=(32, 32, 32), latent_depth=32, hyper_depth=16,
        num_slices=4, charm_hidden=(32, 32), lrp_merge="concat_1x1", hyper_split="per_slice",
    ),
    "toy_elic_charm_swint": dict(
        transform_family="elic", entropy_family="charm", hyper_family="swint",
        analysis_depths=(16, 32, 32), latent_depth=32, hyper_depth=16, num_residual_blocks=2,
        num_slices=4, lrp_merge="concat_1x1", hyper_split="per_slice", swint_window=4,
        swint_stage_depths=(1, 1, 1, 1), hyper_stage_depths=(1, 1), swint_head_dim=8,
        charm_hidden=(32, 32),
    ),
    "toy_swint_hyperprior": dict(
        transform_family="swint", analysis_depths=(16, 16, 24), latent_depth=32, hyper_depth=16,
        swint_window=4, swint_stage_depths=(1, 1, 1, 1), hyper_stage_depths=(1, 1),
        swint_head_dim=8,
    ),
}


def preset(name: str) -> ModelConfig:
    try:
        return ModelConfig(**_PRESETS[name])
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; known: {sorted(_PRESETS)}") from None


def preset_names() -> list[str]:
    return sorted(_PRESETS)
