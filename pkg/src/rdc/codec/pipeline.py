"""Image <-> bitstream pipelines.

The encoder runs the same latent pass as the decoder, feeding it symbols it
quantized itself, so the reconstruction it reports is exactly what the
decoder will produce.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import torch
import torch.nn.functional as F

from ..config import TOTAL_STRIDE
from ..entropy import factorized_bits, gaussian_bits
from ..errors import ConfigHashMismatch, ContractError, DecodeError
from .bitstream import Bitstream
from .quantize import symbols_of
from .rangecoder import RangeDecoder, RangeEncoder, decode_value, encode_value, range_decode, range_encode
from .tables import GaussianTables, factorized_tables


@lru_cache(maxsize=1)
def gaussian_tables() -> GaussianTables:
    return GaussianTables()


@dataclass
class EncodeResult:
    bitstream: Bitstream
    reconstruction: torch.Tensor      # (1, 3, H, W) in [0, 1], cropped
    z_symbols: torch.Tensor
    y_symbols: list[torch.Tensor]      # one per slice
    estimated_bits: float
    estimated_z_bits: float
    estimated_y_bits: float

    @property
    def data(self) -> bytes:
        return self.bitstream.to_bytes()

    @property
    def actual_bits(self) -> int:
        """Coded payload bits, header excluded."""
        return 8 * self.bitstream.payload_bytes

    @property
    def num_pixels(self) -> int:
        return self.bitstream.orig_height * self.bitstream.orig_width

    @property
    def bpp(self) -> float:
        """Bits per pixel of the whole stream, header included."""
        return 8 * len(self.bitstream) / self.num_pixels

    @property
    def estimated_bpp(self) -> float:
        return self.estimated_bits / self.num_pixels


@dataclass
class DecodeResult:
    reconstruction: torch.Tensor
    z_symbols: torch.Tensor
    y_symbols: list[torch.Tensor]


@contextlib.contextmanager
def _inference(model):
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            yield
    finally:
        model.train(was_training)


def image_to_tensor(image) -> torch.Tensor:
    """uint8 (H, W, 3) array -> float (1, 3, H, W) in [0, 1]."""
    arr = np.asarray(image)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.dtype != np.uint8:
        raise ContractError(f"expected 8-bit RGB (H, W, 3), got {arr.dtype} {arr.shape}")
    return torch.from_numpy(np.array(arr, order="C", copy=True)).permute(2, 0, 1).unsqueeze(0).float() / 255.0


def tensor_to_image(x: torch.Tensor) -> np.ndarray:
    return (x[0].clamp(0, 1) * 255.0).round().to(torch.uint8).permute(1, 2, 0).numpy()


def pad_to_multiple(x: torch.Tensor, multiple: int = TOTAL_STRIDE) -> torch.Tensor:
    h, w = x.shape[-2:]
    ph, pw = (-h) % multiple, (-w) % multiple
    if not (ph or pw):
        return x
    mode = "reflect" if ph < h and pw < w else "replicate"
    return F.pad(x, (0, pw, 0, ph), mode=mode)


def _padded(h: int, w: int) -> tuple[int, int]:
    return h + (-h) % TOTAL_STRIDE, w + (-w) % TOTAL_STRIDE


def encode_image(image, model) -> EncodeResult:
    x0 = image_to_tensor(image) if not isinstance(image, torch.Tensor) else image
    h, w = x0.shape[-2:]
    tables = gaussian_tables()
    with _inference(model):
        x = pad_to_multiple(x0)
        y = model.g_a(x)
        z = model.h_a(y)
        z_sym = symbols_of(z)
        z_hat = z_sym.to(z.dtype)
        z_tables = factorized_tables(model.prior)
        cz, zh, zw = z_sym.shape[1:]
        z_payload = range_encode(
            z_sym[0].reshape(-1).tolist(), z_tables, np.repeat(np.arange(cz), zh * zw).tolist()
        )
        u = model.h_s(z_hat)

        enc = RangeEncoder()
        y_syms: list[torch.Tensor] = []

        def code(index, params):
            sym = symbols_of(model.slice_of(y, index), params.mean)
            idx = tables.index(params.scale).reshape(-1).tolist()
            for s, i in zip(sym.reshape(-1).tolist(), idx):
                encode_value(enc, s, tables.tables[i])
            y_syms.append(sym)
            return sym.to(y.dtype) + params.mean

        y_hat, coded = model.latent_pass(u, code)
        y_payload = enc.finish()
        x_hat = model.g_s(y_hat)[..., :h, :w]

        z_bits = float(factorized_bits(z_hat, model.prior.logits)[0])
        y_bits = float(sum(gaussian_bits(y_q, p)[0] for y_q, p in coded))

    stream = Bitstream(model.cfg.identity_hash(), int(h), int(w), z_payload, y_payload)
    return EncodeResult(stream, x_hat, z_sym, y_syms, z_bits + y_bits, z_bits, y_bits)


def decode_symbols(stream, model):
    """Entropy-decode a stream and return the decoder-side latent pass inputs.

    Returns ``(z_symbols, y_symbols, y_hat)`` where ``y_hat`` is the refined
    latent ready for synthesis.
    """
    if isinstance(stream, (bytes, bytearray, memoryview)):
        stream = Bitstream.from_bytes(bytes(stream))
    expected = model.cfg.identity_hash()
    if stream.config_hash != expected:
        raise ConfigHashMismatch(stream.config_hash, expected)
    hp, wp = _padded(stream.orig_height, stream.orig_width)
    cz = model.cfg.hyper_depth
    zh, zw = hp // TOTAL_STRIDE, wp // TOTAL_STRIDE
    tables = gaussian_tables()
    with _inference(model):
        z_tables = factorized_tables(model.prior)
        count = cz * zh * zw
        z_vals = range_decode(stream.z_payload, z_tables, np.repeat(np.arange(cz), zh * zw).tolist(), count)
        z_sym = torch.tensor(z_vals, dtype=torch.int64).view(1, cz, zh, zw)
        u = model.h_s(z_sym.to(torch.float32))

        dec = RangeDecoder(stream.y_payload)
        y_syms: list[torch.Tensor] = []

        def code(index, params):
            idx = tables.index(params.scale).reshape(-1).tolist()
            vals = [decode_value(dec, tables.tables[i]) for i in idx]
            sym = torch.tensor(vals, dtype=torch.int64).view(params.mean.shape)
            y_syms.append(sym)
            return sym.to(params.mean.dtype) + params.mean

        y_hat, _ = model.latent_pass(u, code)
        if not dec.at_end():
            raise DecodeError("y payload has unread bytes; stream is corrupt")
    return stream, z_sym, y_syms, y_hat


def decode_image(data, model) -> DecodeResult:
    stream, z_sym, y_syms, y_hat = decode_symbols(data, model)
    with _inference(model):
        x_hat = model.g_s(y_hat)[..., :stream.orig_height, :stream.orig_width]
    return DecodeResult(x_hat, z_sym, y_syms)


def reconstruct_from_symbols(model, z_symbols: torch.Tensor, y_symbols: list[torch.Tensor],
                             height: int, width: int) -> torch.Tensor:
    """Neural decode path only: hyper-synthesis, latent pass, synthesis.

    Used to time decoding without entropy coding.
    """
    with _inference(model):
        u = model.h_s(z_symbols.to(torch.float32))

        def code(index, params):
            k = 0 if index is None else index
            return y_symbols[k].to(params.mean.dtype) + params.mean

        y_hat, _ = model.latent_pass(u, code)
        return model.g_s(y_hat)[..., :height, :width]
