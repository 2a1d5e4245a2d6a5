"""Discretized CDF tables handed to the range coder."""

from __future__ import annotations

import math

import numpy as np
import torch
from scipy.special import ndtr, ndtri

from .rangecoder import PRECISION, CdfTable

TAIL_MASS = 2.0 ** -8
NUM_SCALES = 64
TABLE_SCALE_MIN = 0.11
TABLE_SCALE_MAX = 20.0


def pmf_to_cdf(pmf: np.ndarray, escape_mass: float | None = None, precision: int = PRECISION) -> np.ndarray:
    """Quantize a pmf (plus optional escape bin) to an integer CDF.

    Every bin gets a frequency of at least 1 and the total is exactly
    ``2**precision``, so the CDF is strictly increasing.
    """
    p = np.asarray(pmf, dtype=np.float64)
    if escape_mass is not None:
        p = np.append(p, max(escape_mass, 0.0))
    p = p / p.sum()
    total = 1 << precision
    n = len(p)
    if n > total:
        raise ValueError("more bins than the precision can represent")
    scaled = p * (total - n)
    freq = np.floor(scaled).astype(np.int64) + 1
    short = total - int(freq.sum())
    if short:
        # hand the remainder to the largest fractional parts, stable order
        order = np.argsort(-(scaled - np.floor(scaled)), kind="stable")
        freq[order[:short]] += 1
    cdf = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(freq, out=cdf[1:])
    return cdf.astype(np.uint32)


class GaussianTables:
    """Zero-mean Gaussian tables at log-spaced scales.

    Symbol values are mean-centered residuals; each table spans
    ``[-K, K]`` with ``K`` leaving at most half the tail mass on either side,
    plus an escape bin.
    """

    def __init__(self, scale_min: float = TABLE_SCALE_MIN, scale_max: float = TABLE_SCALE_MAX,
                 num_scales: int = NUM_SCALES, tail_mass: float = TAIL_MASS):
        self.log_min = math.log(scale_min)
        self.log_step = (math.log(scale_max) - self.log_min) / (num_scales - 1)
        self.scales = np.exp(self.log_min + self.log_step * np.arange(num_scales))
        self.tail_mass = tail_mass
        self.pmfs: list[np.ndarray] = []
        self.tables: list[CdfTable] = []
        z = -ndtri(tail_mass / 2)
        for s in self.scales:
            k = max(1, int(math.ceil(z * s - 0.5)))
            pmf = gaussian_pmf(np.arange(-k, k + 1), 0.0, s)
            self.pmfs.append(pmf)
            self.tables.append(CdfTable(pmf_to_cdf(pmf, 1.0 - pmf.sum()), lo=-k))

    def index(self, scale: torch.Tensor) -> np.ndarray:
        """Nearest table (in log-scale) for each element of ``scale``."""
        s = scale.detach().to(torch.float64).cpu().numpy()
        idx = np.rint((np.log(s) - self.log_min) / self.log_step)
        return np.clip(idx, 0, len(self.scales) - 1).astype(np.int64)

    def export(self) -> bytes:
        """All tables as concatenated little-endian u32 CDF arrays."""
        return b"".join(t.to_bytes() for t in self.tables)


def gaussian_pmf(values: np.ndarray, mean: float, scale: float) -> np.ndarray:
    v = np.abs(np.asarray(values, dtype=np.float64) - mean)
    return ndtr((0.5 - v) / scale) - ndtr((-0.5 - v) / scale)


def factorized_tables(prior, tail_mass: float = TAIL_MASS) -> list[CdfTable]:
    """One table per hyper-latent channel from the learned factorized prior."""
    tables = []
    for lo, pmf in prior.pmf_table(tail_mass):
        tables.append(CdfTable(pmf_to_cdf(pmf, 1.0 - pmf.sum()), lo=lo))
    return tables
