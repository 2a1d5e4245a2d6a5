"""FLOPs/parameter accounting, image quality, and decode benchmarking.

Convention: one multiply-accumulate counts as 2 FLOPs. Normalizations,
activations, softmax and the factorized density are not priced; they are
itemized in ``FlopsReport.unpriced``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable

import numpy as np
import torch

from .config import TOTAL_STRIDE
from .errors import BenchmarkError, ContractError, CountingError
from .zoo.inventory import PRICED_KINDS, UNPRICED_KINDS, LayerRecord

FLOPS_CONVENTION = "1 MAC = 2 FLOPs; normalizations, activations, softmax and densities excluded"


@dataclass
class FlopsRow:
    name: str
    kind: str
    phase: str
    flops_total: float
    flops_per_px: float


@dataclass
class FlopsReport:
    height: int
    width: int
    rows: list[FlopsRow]
    totals: dict[str, float]
    params: int
    unpriced: dict[str, int]
    convention: str = FLOPS_CONVENTION

    @property
    def pixels(self) -> int:
        return self.height * self.width

    @property
    def decode_flops(self) -> float:
        """Everything the decoder runs: decode-only plus shared layers."""
        return self.totals["decode"] + self.totals["shared"]

    @property
    def kflops_per_px_decode(self) -> float:
        return self.decode_flops / self.pixels / 1e3

    @property
    def kflops_per_px_encode(self) -> float:
        return (self.totals["encode"] + self.totals["shared"]) / self.pixels / 1e3

    @property
    def params_millions(self) -> float:
        return self.params / 1e6

    def to_dict(self) -> dict:
        return {
            "height": self.height,
            "width": self.width,
            "convention": self.convention,
            "kflops_per_px_decode": self.kflops_per_px_decode,
            "kflops_per_px_encode": self.kflops_per_px_encode,
            "params": self.params,
            "params_millions": self.params_millions,
            "totals": self.totals,
            "unpriced": self.unpriced,
            "rows": [asdict(r) for r in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def rows_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["name", "kind", "phase", "flops_total", "flops_per_px"])
        for r in self.rows:
            w.writerow([r.name, r.kind, r.phase, r.flops_total, r.flops_per_px])
        return buf.getvalue()


_PHASE_BUCKET = {"encode_only": "encode", "decode_only": "decode", "shared": "shared"}


def _grid_size(n: int, grid: int) -> int:
    return -(-n // grid)


def layer_flops(rec: LayerRecord, height: int, width: int) -> float:
    """FLOPs of one priced layer on an image of ``height`` x ``width``."""
    h, w = _grid_size(height, rec.grid), _grid_size(width, rec.grid)
    k2 = rec.kernel * rec.kernel
    if rec.kind == "conv":
        return 2.0 * k2 * rec.in_channels * rec.out_channels * h * w
    if rec.kind == "tconv":
        h_in, w_in = _grid_size(height, rec.grid * rec.stride), _grid_size(width, rec.grid * rec.stride)
        return 2.0 * k2 * rec.in_channels * rec.out_channels * h_in * w_in
    if rec.kind in ("dense", "attention_qkv"):
        return 2.0 * rec.in_channels * rec.out_channels * h * w
    if rec.kind == "attention_matmul":
        # scores (q k^T) and weighted values, each T*d MACs per token
        return 2.0 * 2.0 * rec.tokens * rec.in_channels * h * w
    raise CountingError(f"no pricing rule for layer kind {rec.kind!r} ({rec.name})")


def count_flops(inventory: Iterable[LayerRecord], height: int, width: int,
                phase_filter: Iterable[str] | None = None,
                orig_height: int | None = None, orig_width: int | None = None) -> FlopsReport:
    """Price every layer for an image of ``height`` x ``width``.

    Per-pixel figures divide by the original image size when given (padded
    inputs run on the padded grid).
    """
    phases = set(phase_filter) if phase_filter is not None else None
    rows, unpriced = [], Counter()
    totals = {"encode": 0.0, "decode": 0.0, "shared": 0.0}
    params = 0
    px = (orig_height or height) * (orig_width or width)
    for rec in inventory:
        if phases is not None and rec.phase not in phases:
            continue
        params += rec.params
        if rec.kind in UNPRICED_KINDS:
            unpriced[rec.kind] += 1
            continue
        if rec.kind not in PRICED_KINDS:
            raise CountingError(f"no pricing rule for layer kind {rec.kind!r} ({rec.name})")
        f = layer_flops(rec, height, width)
        rows.append(FlopsRow(rec.name, rec.kind, rec.phase, f, f / px))
        totals[_PHASE_BUCKET[rec.phase]] += f
    return FlopsReport(orig_height or height, orig_width or width, rows, totals, params, dict(unpriced))


def model_flops(model, height: int, width: int) -> FlopsReport:
    """FLOPs of a whole model at an original image size (padded to 64)."""
    from .zoo.inventory import layer_inventory

    hp = height + (-height) % TOTAL_STRIDE
    wp = width + (-width) % TOTAL_STRIDE
    return count_flops(layer_inventory(model), hp, wp, orig_height=height, orig_width=width)


# -- quality -------------------------------------------------------------

def psnr(reference, reconstruction) -> float:
    """PSNR in dB for images on the 0-255 scale; ``inf`` when identical."""
    a = np.asarray(reference, dtype=np.float64)
    b = np.asarray(reconstruction, dtype=np.float64)
    if a.shape != b.shape:
        raise ContractError(f"shape mismatch {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    return psnr_from_mse(mse)


def psnr_from_mse(mse: float) -> float:
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(255.0 ** 2 / mse)


def bpp(stream, height: int, width: int) -> float:
    """Bits per pixel of a whole stream (bytes, a Bitstream, or a byte count)."""
    if isinstance(stream, int):
        n = stream
    else:
        n = len(stream)
    return 8.0 * n / (height * width)


# -- runtime -------------------------------------------------------------

@dataclass
class RuntimeReport:
    device_label: str
    image_set_label: str
    warmup_runs: int
    trials: int
    include_entropy_coding: bool
    per_image_median_s: list[float]
    pixels: list[int]
    image_names: list[str] = field(default_factory=list)

    @property
    def megapixels_per_second(self) -> float:
        return sum(self.pixels) / sum(self.per_image_median_s) / 1e6

    def to_dict(self) -> dict:
        d = asdict(self)
        d["megapixels_per_second"] = self.megapixels_per_second
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def _sync():
    if torch.cuda.is_available():
        torch.cuda.synchronize()


def benchmark_decode(model, bitstreams, warmup: int = 1, trials: int = 5,
                     include_entropy_coding: bool = False, device_label: str = "unlabeled",
                     image_set_label: str = "", names: list[str] | None = None,
                     clock: Callable[[], float] = time.perf_counter) -> RuntimeReport:
    """Median decode time per image.

    Without entropy coding, symbols are decoded once up front and only the
    neural path (hyper-synthesis, latent pass, synthesis) is timed.
    """
    from .codec import Bitstream, decode_image, decode_symbols, reconstruct_from_symbols

    if trials < 3 or warmup < 1:
        raise ContractError("need trials >= 3 and warmup >= 1")
    names = names or [f"image{i}" for i in range(len(bitstreams))]
    medians, pixels = [], []
    for name, data in zip(names, bitstreams):
        stream = data if isinstance(data, Bitstream) else Bitstream.from_bytes(bytes(data))
        h, w = stream.orig_height, stream.orig_width
        try:
            if include_entropy_coding:
                def run():
                    return decode_image(stream, model)
            else:
                _, z_sym, y_syms, _ = decode_symbols(stream, model)

                def run():
                    return reconstruct_from_symbols(model, z_sym, y_syms, h, w)
            for _ in range(warmup):
                run()
            times = []
            for _ in range(trials):
                _sync()
                t0 = clock()
                run()
                _sync()
                times.append(clock() - t0)
        except Exception as exc:
            raise BenchmarkError(f"decode failed on {name}: {exc}") from exc
        medians.append(statistics.median(times))
        pixels.append(h * w)
    return RuntimeReport(device_label, image_set_label, warmup, trials, include_entropy_coding,
                         medians, pixels, list(names))
