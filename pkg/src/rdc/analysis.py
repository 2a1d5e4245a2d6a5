"""Rate-distortion curve analysis: BD-rate, rate savings, Pareto frontiers, rank comparison."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import PchipInterpolator
from scipy.stats import kendalltau, rankdata

from .errors import IngestionError, NoOverlapError

METHODS = ("pchip", "cubic_fit")
NUM_SAMPLES = 1025


@dataclass(frozen=True)
class RDPoint:
    bpp: float
    psnr_db: float


@dataclass
class RDCurve:
    label: str
    points: list[RDPoint]

    def __post_init__(self):
        pts = sorted(self.points, key=lambda p: p.psnr_db)
        if len(pts) < 2:
            raise IngestionError(f"curve {self.label!r} needs at least 2 points")
        if any(not (p.bpp > 0) or not np.isfinite(p.psnr_db) for p in pts):
            raise IngestionError(f"curve {self.label!r} has non-positive rate or non-finite PSNR")
        for a, b in zip(pts, pts[1:]):
            if not (b.psnr_db > a.psnr_db and b.bpp > a.bpp):
                raise IngestionError(
                    f"curve {self.label!r} is not strictly monotone near "
                    f"({a.bpp}, {a.psnr_db}) -> ({b.bpp}, {b.psnr_db})"
                )
        self.points = pts

    @classmethod
    def from_arrays(cls, label: str, bpp, psnr) -> "RDCurve":
        return cls(label, [RDPoint(float(r), float(q)) for r, q in zip(bpp, psnr)])

    @property
    def bpp(self) -> np.ndarray:
        return np.array([p.bpp for p in self.points])

    @property
    def psnr(self) -> np.ndarray:
        return np.array([p.psnr_db for p in self.points])

    @property
    def span(self) -> tuple[float, float]:
        return self.points[0].psnr_db, self.points[-1].psnr_db

    def scaled(self, factor: float, label: str | None = None) -> "RDCurve":
        return RDCurve(label or self.label, [RDPoint(p.bpp * factor, p.psnr_db) for p in self.points])


def log_rate_interpolant(curve: RDCurve, method: str = "pchip"):
    """log2(bpp) as a function of PSNR."""
    x, y = curve.psnr, np.log2(curve.bpp)
    if method == "pchip":
        return PchipInterpolator(x, y, extrapolate=False)
    if method == "cubic_fit":
        return np.poly1d(np.polyfit(x, y, min(3, len(x) - 1)))
    raise ValueError(f"unknown interpolation method {method!r}; expected one of {METHODS}")


@dataclass(frozen=True)
class BDResult:
    percent_rate_delta: float
    quality_lo: float
    quality_hi: float
    method: str


def overlap(curves: Iterable[RDCurve]) -> tuple[float, float]:
    """Largest PSNR range covered by every curve."""
    curves = list(curves)
    lo = max(c.span[0] for c in curves)
    hi = min(c.span[1] for c in curves)
    if not lo < hi:
        raise NoOverlapError(f"PSNR spans of {[c.label for c in curves]} do not overlap")
    return lo, hi


def _check_range(lo: float, hi: float, curves) -> None:
    if not lo < hi:
        raise NoOverlapError(f"empty quality range [{lo}, {hi}]")
    for c in curves:
        a, b = c.span
        if lo < a or hi > b:
            raise NoOverlapError(f"range [{lo}, {hi}] dB leaves curve {c.label!r} span [{a}, {b}]")


def bd_rate(test: RDCurve, ref: RDCurve, quality_range: tuple[float, float] | None = None,
            method: str = "pchip") -> BDResult:
    """Average rate difference of ``test`` against ``ref`` in percent.

    Negative means ``test`` needs fewer bits for the same PSNR. The mean
    log-rate gap is integrated with composite Simpson over 1025 samples.
    """
    lo, hi = quality_range if quality_range is not None else overlap([test, ref])
    _check_range(lo, hi, [test, ref])
    q = np.linspace(lo, hi, NUM_SAMPLES)
    gap = log_rate_interpolant(test, method)(q) - log_rate_interpolant(ref, method)(q)
    mean_gap = simpson(gap, x=q) / (hi - lo)
    return BDResult(float((2.0 ** mean_gap - 1.0) * 100.0), float(lo), float(hi), method)


@dataclass(frozen=True)
class RateSaving:
    psnr_db: float
    savings_percent: float | None
    error: str | None = None


def rate_savings_curve(test: RDCurve, ref: RDCurve, quality_grid, method: str = "pchip") -> list[RateSaving]:
    """Per-quality rate savings of ``test`` relative to ``ref`` (higher is better).

    Grid points outside the overlap get an error marker instead of a value.
    """
    f_test = log_rate_interpolant(test, method)
    f_ref = log_rate_interpolant(ref, method)
    lo = max(test.span[0], ref.span[0])
    hi = min(test.span[1], ref.span[1])
    out = []
    for q in quality_grid:
        q = float(q)
        if not lo <= q <= hi:
            out.append(RateSaving(q, None, f"outside overlap [{lo}, {hi}]"))
            continue
        r_ref = 2.0 ** float(f_ref(q))
        r_test = 2.0 ** float(f_test(q))
        out.append(RateSaving(q, (r_ref - r_test) / r_ref * 100.0))
    return out


# -- frontier and ranks ---------------------------------------------------

@dataclass(frozen=True)
class RDCPoint:
    flops: float
    rd_loss: float
    label: str = ""


def _as_point(p) -> RDCPoint:
    if isinstance(p, RDCPoint):
        return p
    if isinstance(p, Mapping):
        return RDCPoint(float(p["flops"]), float(p["rd_loss"]), str(p.get("label", "")))
    flops, loss, *rest = p
    return RDCPoint(float(flops), float(loss), str(rest[0]) if rest else "")


def pareto_frontier(points) -> list[RDCPoint]:
    """Points not dominated in (flops, rd_loss), both minimized, sorted by flops.

    Exact duplicates of a frontier point are all kept.
    """
    pts = sorted((_as_point(p) for p in points), key=lambda p: (p.flops, p.rd_loss))
    front: list[RDCPoint] = []
    best = np.inf
    for p in pts:
        if p.rd_loss < best:
            front.append(p)
            best = p.rd_loss
        elif front and (p.flops, p.rd_loss) == (front[-1].flops, front[-1].rd_loss):
            front.append(p)
    return front


@dataclass
class RankResult:
    kendall_tau_flops_vs_speed: float
    labels: list[str]
    rank_pairs: list[tuple[int, int]] = field(default_factory=list)
    inversions: list[tuple[str, str]] = field(default_factory=list)


def rank_analysis(rows) -> RankResult:
    """Compare FLOPs ordering with speed ordering, and two devices with each other.

    ``rows`` are mappings with ``label``, ``kflops_px``, ``speed_a`` and
    optionally ``speed_b`` (MP/s). Tau is between ascending FLOPs and
    descending speed (slowness); 1.0 means more FLOPs is always slower.
    Device ranks count 1 for the fastest.
    """
    rows = list(rows)
    if len(rows) < 2:
        raise IngestionError("rank analysis needs at least 2 rows")
    labels = [str(r["label"]) for r in rows]
    if len(set(labels)) != len(labels):
        dupes = sorted({l for l in labels if labels.count(l) > 1})
        raise IngestionError(f"duplicate labels: {dupes}")
    flops = np.array([float(r["kflops_px"]) for r in rows])
    speed_a = np.array([float(r["speed_a"]) for r in rows])
    tau = kendalltau(flops, -speed_a).statistic
    result = RankResult(float(tau), labels)
    if all(r.get("speed_b") not in (None, "") for r in rows):
        speed_b = np.array([float(r["speed_b"]) for r in rows])
        ra = rankdata(-speed_a, method="min").astype(int)
        rb = rankdata(-speed_b, method="min").astype(int)
        result.rank_pairs = [(int(a), int(b)) for a, b in zip(ra, rb)]
        for i in range(len(rows)):
            for j in range(i + 1, len(rows)):
                if (speed_a[i] - speed_a[j]) * (speed_b[i] - speed_b[j]) < 0:
                    result.inversions.append((labels[i], labels[j]))
    return result


# -- ingestion -----------------------------------------------------------

def read_curves(path) -> dict[str, RDCurve]:
    """Curves from a ``label,bpp,psnr`` CSV, keyed by label in file order."""
    grouped: dict[str, list[RDPoint]] = {}
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        missing = {"label", "bpp", "psnr"} - set(reader.fieldnames or ())
        if missing:
            raise IngestionError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            try:
                pt = RDPoint(float(row["bpp"]), float(row["psnr"]))
            except ValueError as exc:
                raise IngestionError(f"{path}: bad row {row}") from exc
            grouped.setdefault(row["label"], []).append(pt)
    return {label: RDCurve(label, pts) for label, pts in grouped.items()}


def write_curves(curves: Iterable[RDCurve], path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["label", "bpp", "psnr"])
        for c in curves:
            for p in c.points:
                w.writerow([c.label, repr(p.bpp), repr(p.psnr_db)])
