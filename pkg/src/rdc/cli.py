"""Command-line interface: ``rdc <command> [flags]``.

Exit codes: 0 success, 1 internal error, 2 input or contract error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import logging
import sys
import traceback
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from PIL import Image

from . import __version__
from .errors import IngestionError, RDCError

log = logging.getLogger("rdc")

DEFAULT_HEIGHT, DEFAULT_WIDTH = 512, 768


def published_table_path() -> Path:
    return Path(str(resources.files("rdc") / "data" / "table1_published.csv"))


# -- manifests -----------------------------------------------------------

@dataclass
class RunManifest:
    command: str
    argv: list[str]
    config: str | None
    config_hash: str | None
    seed: int | None
    version: str
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    timestamp: str = ""

    def write(self, path: Path) -> Path:
        self.timestamp = self.timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat()
        path.write_text(json.dumps(asdict(self), indent=1) + "\n")
        return path

    @classmethod
    def read(cls, path) -> "RunManifest":
        try:
            return cls(**json.loads(Path(path).read_text()))
        except (OSError, ValueError, TypeError) as exc:
            raise IngestionError(f"unreadable manifest {path}: {exc}") from exc


def manifest_path(out: Path) -> Path:
    """Manifests live inside output directories, or beside output files."""
    return out / "manifest.json" if out.is_dir() else out.with_name(out.name + ".manifest.json")


def _manifest(args, cfg=None, inputs=None, outputs=()) -> RunManifest:
    return RunManifest(
        command=args.command,
        argv=list(args.argv),
        config=cfg.to_document() if cfg is not None else None,
        config_hash=f"{cfg.identity_hash():016x}" if cfg is not None else None,
        seed=getattr(args, "seed", None),
        version=__version__,
        inputs={k: str(v) for k, v in (inputs or {}).items() if v is not None},
        outputs=[str(o) for o in outputs],
    )


# -- shared helpers ------------------------------------------------------

def resolve_config(spec):
    """A preset name or a path to a config document."""
    from .config import ModelConfig, preset, preset_names

    if spec is None:
        raise IngestionError("--config is required (a preset name or a config file)")
    if spec in preset_names():
        return preset(spec)
    path = Path(spec)
    if not path.is_file():
        raise IngestionError(f"--config {spec!r} is neither a preset ({', '.join(preset_names())}) nor a file")
    return ModelConfig.load(path)


def load_model(args):
    """Model from ``--checkpoint``, else a freshly initialized ``--config`` at ``--seed``."""
    from .model import build_model
    from .training import load_model as load_trained

    if getattr(args, "checkpoint", None):
        model = load_trained(args.checkpoint)
    else:
        model = build_model(resolve_config(args.config), seed=args.seed)
    model.eval()
    return model


def read_image(path) -> np.ndarray:
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("RGB"))
    except OSError as exc:
        raise IngestionError(f"cannot read image {path}: {exc}") from exc


def write_image(arr: np.ndarray, path) -> None:
    Image.fromarray(arr).save(path, format="PNG")


def image_paths(directory) -> list[Path]:
    from .training import IMAGE_SUFFIXES

    d = Path(directory)
    if not d.is_dir():
        raise IngestionError(f"{directory} is not a directory")
    paths = sorted(p for p in d.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not paths:
        raise IngestionError(f"no images in {directory}")
    return paths


def parse_range(text):
    if text is None:
        return None
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise IngestionError(f"--range expects lo:hi, got {text!r}") from exc
    return lo, hi


def read_table(path) -> list[dict]:
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    if not rows:
        raise IngestionError(f"{path} has no rows")
    return rows


def _out_dir(path) -> Path:
    d = Path(path)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write_csv(path, header, rows) -> Path:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)
    return Path(path)


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


# -- commands ------------------------------------------------------------

def cmd_train(args) -> int:
    from .training import save_checkpoint, train

    cfg = resolve_config(args.config)
    if args.images is None or args.out is None:
        raise IngestionError("train needs --images and --out")
    state = train(cfg, args.images, args.steps, args.batch_size, args.seed, crop=args.crop,
                  lr=args.lr, log_every=args.log_every)
    out = save_checkpoint(state, args.out)
    _manifest(args, cfg, {"images": args.images}, [out]).write(manifest_path(out))
    print(f"trained {cfg.label} for {state.step} steps: bpp {state.ema_bpp:.4f} mse {state.ema_mse:.2f} -> {out}")
    return 0


def cmd_compress(args) -> int:
    from .codec import encode_image

    model = load_model(args)
    image = read_image(args.input)
    res = encode_image(image, model)
    out = Path(args.out or Path(args.input).with_suffix(".rdc"))
    out.write_bytes(res.data)
    _manifest(args, model.cfg, {"input": args.input, "checkpoint": args.checkpoint}, [out]).write(manifest_path(out))
    print(f"{out}: {len(res.bitstream)} bytes, {res.bpp:.4f} bpp (estimate {res.estimated_bpp:.4f})")
    return 0


def cmd_decompress(args) -> int:
    from .codec import decode_image, tensor_to_image

    model = load_model(args)
    try:
        data = Path(args.input).read_bytes()
    except OSError as exc:
        raise IngestionError(f"cannot read {args.input}: {exc}") from exc
    res = decode_image(data, model)
    out = Path(args.out or Path(args.input).with_suffix(".png"))
    write_image(tensor_to_image(res.reconstruction), out)
    _manifest(args, model.cfg, {"input": args.input, "checkpoint": args.checkpoint}, [out]).write(manifest_path(out))
    print(f"{out}: {res.reconstruction.shape[-2]}x{res.reconstruction.shape[-1]}")
    return 0


EVAL_HEADER = ["image", "height", "width", "bytes", "bpp", "estimated_bpp", "psnr", "decode_match"]


def cmd_eval(args) -> int:
    import torch

    from .analysis import RDCurve, write_curves
    from .codec import decode_image, encode_image, tensor_to_image
    from .metrics import psnr

    model = load_model(args)
    out = _out_dir(args.out)
    rows = []
    for path in image_paths(args.images):
        image = read_image(path)
        enc = encode_image(image, model)
        dec = decode_image(enc.data, model)
        match = bool(torch.equal(enc.reconstruction, dec.reconstruction))
        rows.append([path.name, image.shape[0], image.shape[1], len(enc.bitstream), enc.bpp,
                     enc.estimated_bpp, psnr(image, tensor_to_image(dec.reconstruction)), match])
    mean = ["mean", "", "", float(np.mean([r[3] for r in rows]))]
    mean += [float(np.mean([r[i] for r in rows])) for i in (4, 5, 6)]
    mean.append(all(r[7] for r in rows))
    eval_csv = _write_csv(out / "eval.csv", EVAL_HEADER, [[_fmt(v) for v in r] for r in rows + [mean]])
    label = args.label or model.cfg.label
    rd_csv = out / "rd.csv"
    # a single evaluation gives one RD point; sweeps over lambda are concatenated by the caller
    with open(rd_csv, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["label", "bpp", "psnr"])
        w.writerow([label, repr(mean[4]), repr(mean[6])])
    _manifest(args, model.cfg, {"images": args.images, "checkpoint": args.checkpoint},
              [eval_csv, rd_csv]).write(manifest_path(out))
    print(f"{len(rows)} images: mean {mean[4]:.4f} bpp, {mean[6]:.2f} dB, decode match {mean[7]}")
    return 0 if mean[7] else 1


def cmd_flops(args) -> int:
    from .metrics import model_flops

    model = load_model(args)
    report = model_flops(model, args.height, args.width)
    print(f"{model.cfg.label}: {report.kflops_per_px_decode:.1f} kFLOPs/px decode, "
          f"{report.kflops_per_px_encode:.1f} encode, {report.params_millions:.3f} M params")
    if args.out:
        out = _out_dir(args.out)
        (out / "flops.json").write_text(report.to_json() + "\n")
        (out / "flops_layers.csv").write_text(report.rows_csv())
        _manifest(args, model.cfg, {"checkpoint": args.checkpoint},
                  [out / "flops.json", out / "flops_layers.csv"]).write(manifest_path(out))
    return 0


def cmd_bench(args) -> int:
    from .codec import encode_image
    from .metrics import benchmark_decode

    model = load_model(args)
    paths = image_paths(args.images)
    streams = [encode_image(read_image(p), model).bitstream for p in paths]
    report = benchmark_decode(model, streams, warmup=args.warmup, trials=args.trials,
                              include_entropy_coding=args.include_entropy_coding,
                              device_label=args.device_label, image_set_label=str(args.images),
                              names=[p.name for p in paths])
    print(f"{report.megapixels_per_second:.3f} MP/s on {report.device_label} "
          f"({len(paths)} images, entropy coding {'on' if args.include_entropy_coding else 'off'})")
    if args.out:
        out = _out_dir(args.out)
        (out / "runtime.json").write_text(report.to_json() + "\n")
        _manifest(args, model.cfg, {"images": args.images, "checkpoint": args.checkpoint},
                  [out / "runtime.json"]).write(manifest_path(out))
    return 0


def _bd_pairs(curves, test, ref):
    if ref is None:
        if len(curves) != 2 or test is not None:
            raise IngestionError("give --ref (and optionally --test) unless the CSV holds exactly two curves")
        test, ref = list(curves)
    for name in (ref, test):
        if name is not None and name not in curves:
            raise IngestionError(f"no curve labeled {name!r}; have {sorted(curves)}")
    tests = [test] if test is not None else [k for k in curves if k != ref]
    return [(t, ref) for t in tests]


def cmd_bdrate(args) -> int:
    from .analysis import bd_rate, read_curves

    curves = read_curves(args.curves)
    results = []
    for t, r in _bd_pairs(curves, args.test, args.ref):
        res = bd_rate(curves[t], curves[r], parse_range(args.range), args.method)
        results.append((t, r, res))
        print(f"{t} vs {r}: {res.percent_rate_delta:.2f}% over [{res.quality_lo:.2f}, {res.quality_hi:.2f}] dB ({res.method})")
    if args.out:
        out = Path(args.out)
        _write_csv(out, ["test", "ref", "bd_rate_percent", "quality_lo", "quality_hi", "method"],
                   [[t, r, repr(x.percent_rate_delta), repr(x.quality_lo), repr(x.quality_hi), x.method]
                    for t, r, x in results])
        _manifest(args, inputs={"curves": args.curves}, outputs=[out]).write(manifest_path(out))
    return 0


def read_points(path) -> list[dict]:
    rows = read_table(path)
    missing = {"label", "kflops_px", "rd_loss"} - set(rows[0])
    if missing:
        raise IngestionError(f"{path}: missing columns {sorted(missing)}")
    try:
        return [{"label": r["label"], "flops": float(r["kflops_px"]), "rd_loss": float(r["rd_loss"])} for r in rows]
    except ValueError as exc:
        raise IngestionError(f"{path}: non-numeric value: {exc}") from exc


def cmd_frontier(args) -> int:
    from .analysis import pareto_frontier

    front = pareto_frontier(read_points(args.points))
    rows = [[p.label, repr(p.flops), repr(p.rd_loss)] for p in front]
    for r in rows:
        print(",".join(r))
    if args.out:
        out = _write_csv(args.out, ["label", "kflops_px", "rd_loss"], rows)
        _manifest(args, inputs={"points": args.points}, outputs=[out]).write(manifest_path(out))
    return 0


def _rank_rows(table, flops_col, speed_a, speed_b):
    try:
        return [{"label": r.get("model") or r["label"], "kflops_px": r[flops_col], "speed_a": r[speed_a],
                 "speed_b": r[speed_b] if speed_b else None} for r in table]
    except KeyError as exc:
        raise IngestionError(f"table lacks column {exc}") from exc


def cmd_ranks(args) -> int:
    from .analysis import rank_analysis

    table_path = args.table or published_table_path()
    res = rank_analysis(_rank_rows(read_table(table_path), "kflops_px", args.speed_a, args.speed_b))
    print(f"kendall tau (FLOPs vs slowness, {args.speed_a}): {res.kendall_tau_flops_vs_speed:.4f}")
    if res.rank_pairs:
        print(f"rank pairs ({args.speed_a}, {args.speed_b}): "
              + " ".join(f"{l}={a}/{b}" for l, (a, b) in zip(res.labels, res.rank_pairs)))
        print(f"inversions: {len(res.inversions)}" + "".join(f" {a}<->{b}" for a, b in res.inversions))
    if args.out:
        out = Path(args.out)
        out.write_text(json.dumps({
            "kendall_tau_flops_vs_speed": res.kendall_tau_flops_vs_speed,
            "labels": res.labels,
            "rank_pairs": res.rank_pairs,
            "inversions": res.inversions,
            "speed_a": args.speed_a,
            "speed_b": args.speed_b,
        }, indent=1) + "\n")
        _manifest(args, inputs={"table": table_path}, outputs=[out]).write(manifest_path(out))
    return 0


TABLE_COLUMNS = ["model", "transforms", "entropy_model", "hyper_transforms", "params_M", "kflops_px",
                 "mp_s_kodak_v100", "mp_s_kodak_a100", "mp_s_clic_v100", "mp_s_clic_a100", "rate_savings_bpg"]


def _plot(path, draw) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4))
    draw(ax)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return Path(path)


def cmd_report(args) -> int:
    from .analysis import bd_rate, overlap, pareto_frontier, rank_analysis, rate_savings_curve, read_curves

    out = _out_dir(args.out)
    table_path = args.table or published_table_path()
    table = read_table(table_path)
    missing = set(TABLE_COLUMNS) - set(table[0])
    if missing:
        raise IngestionError(f"{table_path}: missing columns {sorted(missing)}")
    outputs = [_write_csv(out / "table1.csv", TABLE_COLUMNS, [[r[c] for c in TABLE_COLUMNS] for r in table])]

    # rate savings across quality, and BD chart, from ingested curves when given
    rs_rows, bd_rows = [], []
    if args.curves:
        curves = read_curves(args.curves)
        if args.ref is None or args.ref not in curves:
            raise IngestionError(f"--ref must name one of {sorted(curves)}")
        lo, hi = parse_range(args.range) or overlap(curves.values())
        grid = np.linspace(lo, hi, args.grid_points)
        for label, c in curves.items():
            if label == args.ref:
                continue
            for s in rate_savings_curve(c, curves[args.ref], grid, args.method):
                rs_rows.append([label, repr(s.psnr_db), "" if s.savings_percent is None else repr(s.savings_percent),
                                s.error or ""])
            res = bd_rate(c, curves[args.ref], (lo, hi), args.method)
            bd_rows.append([label, args.ref, repr(-res.percent_rate_delta), repr(lo), repr(hi), args.method])
    else:
        for r in table:
            bd_rows.append([r["model"], "BPG (published)", r["rate_savings_bpg"], "", "", "published"])
    outputs.append(_write_csv(out / "rate_savings.csv", ["label", "psnr", "rate_savings_percent", "error"], rs_rows))
    outputs.append(_write_csv(out / "bd_chart.csv",
                              ["label", "ref", "rate_savings_percent", "quality_lo", "quality_hi", "method"], bd_rows))

    # loss vs FLOPs with frontier membership
    if args.points:
        pts = read_points(args.points)
        metric = "rd_loss"
    else:
        pts = [{"label": r["model"], "flops": float(r["kflops_px"]), "rd_loss": -float(r["rate_savings_bpg"])}
               for r in table]
        metric = "negated_rate_savings_bpg"
    front = {(p.label, p.flops, p.rd_loss) for p in pareto_frontier(pts)}
    scatter = [[p["label"], repr(p["flops"]), repr(p["rd_loss"]), metric,
                (p["label"], p["flops"], p["rd_loss"]) in front] for p in pts]
    outputs.append(_write_csv(out / "loss_vs_flops.csv", ["label", "kflops_px", "y", "y_metric", "on_frontier"], scatter))

    # runtime vs FLOPs and device rank pairs
    ranks = rank_analysis(_rank_rows(table, "kflops_px", args.speed_a, args.speed_b))
    rt_rows = [[r["model"], r["kflops_px"], r[args.speed_a], r[args.speed_b], a, b]
               for r, (a, b) in zip(table, ranks.rank_pairs)]
    outputs.append(_write_csv(out / "runtime_vs_flops.csv",
                              ["label", "kflops_px", args.speed_a, args.speed_b, "rank_a", "rank_b"], rt_rows))

    def draw_rs(ax):
        for label in dict.fromkeys(r[0] for r in rs_rows):
            pts_ = [(float(r[1]), float(r[2])) for r in rs_rows if r[0] == label and r[2] != ""]
            ax.plot(*zip(*pts_), label=label)
        ax.set_xlabel("PSNR (dB)")
        ax.set_ylabel(f"rate savings vs {args.ref} (%)")
        if rs_rows:
            ax.legend(fontsize=7)

    def draw_scatter(ax):
        for row in scatter:
            ax.scatter(float(row[1]), float(row[2]), c="C3" if row[4] else "C0", s=12)
        ax.set_xscale("log")
        ax.set_xlabel("kFLOPs/px (decode)")
        ax.set_ylabel(metric)

    def draw_bd(ax):
        ax.bar([r[0] for r in bd_rows], [float(r[2]) for r in bd_rows])
        ax.set_ylabel("BD rate savings (%)")

    def draw_rt(ax):
        ax.scatter([float(r[1]) for r in rt_rows], [1.0 / float(r[2]) for r in rt_rows])
        for r in rt_rows:
            ax.annotate(r[0], (float(r[1]), 1.0 / float(r[2])), fontsize=7)
        ax.set_xlabel("kFLOPs/px (decode)")
        ax.set_ylabel(f"s per MP ({args.speed_a})")

    for name, draw in (("rate_savings", draw_rs), ("loss_vs_flops", draw_scatter),
                       ("bd_chart", draw_bd), ("runtime_vs_flops", draw_rt)):
        outputs.append(_plot(out / f"{name}.png", draw))
    _manifest(args, inputs={"table": table_path, "curves": args.curves, "points": args.points},
              outputs=outputs).write(manifest_path(out))
    print(f"report written to {out} (tau {ranks.kendall_tau_flops_vs_speed:.3f}, "
          f"{len(ranks.inversions)} inversions)")
    return 0


def cmd_replay(args) -> int:
    manifest = RunManifest.read(args.manifest)
    argv = list(manifest.argv)
    if args.out:
        if "--out" not in argv:
            raise IngestionError("manifest command has no --out to redirect")
        argv[argv.index("--out") + 1] = args.out
    log.info("replaying: rdc %s", " ".join(argv))
    return main(argv)


# -- parser --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rdc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"rdc {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def model_flags(sp):
        sp.add_argument("--config", help="preset name or config file")
        sp.add_argument("--checkpoint", help="trained checkpoint directory (overrides --config)")
        sp.add_argument("--seed", type=int, default=0, help="init seed when no checkpoint is given")

    sp = sub.add_parser("train", help="train a model on random crops")
    sp.add_argument("--config", required=True)
    sp.add_argument("--images", required=True)
    sp.add_argument("--out", required=True, help="checkpoint directory")
    sp.add_argument("--steps", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--batch-size", type=int, default=8)
    sp.add_argument("--crop", type=int, default=256)
    sp.add_argument("--lr", type=float, default=1e-4)
    sp.add_argument("--log-every", type=int, default=0)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("compress", help="PNG -> .rdc")
    model_flags(sp)
    sp.add_argument("input")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_compress)

    sp = sub.add_parser("decompress", help=".rdc -> PNG")
    model_flags(sp)
    sp.add_argument("input")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_decompress)

    sp = sub.add_parser("eval", help="compress and decompress a directory, write RD CSVs")
    model_flags(sp)
    sp.add_argument("--images", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--label")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("flops", help="count FLOPs and parameters")
    model_flags(sp)
    sp.add_argument("--height", type=int, default=DEFAULT_HEIGHT)
    sp.add_argument("--width", type=int, default=DEFAULT_WIDTH)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_flops)

    sp = sub.add_parser("bench", help="time decoding")
    model_flags(sp)
    sp.add_argument("--images", required=True)
    sp.add_argument("--device-label", default="cpu")
    sp.add_argument("--warmup", type=int, default=1)
    sp.add_argument("--trials", type=int, default=5)
    sp.add_argument("--include-entropy-coding", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("bdrate", help="BD-rate between curves in a label,bpp,psnr CSV")
    sp.add_argument("curves")
    sp.add_argument("--test")
    sp.add_argument("--ref")
    sp.add_argument("--range", help="lo:hi PSNR range in dB")
    sp.add_argument("--method", choices=("pchip", "cubic_fit"), default="pchip")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_bdrate)

    sp = sub.add_parser("frontier", help="Pareto frontier of a label,kflops_px,rd_loss CSV")
    sp.add_argument("points")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_frontier)

    speed_cols = ("mp_s_kodak_v100", "mp_s_kodak_a100", "mp_s_clic_v100", "mp_s_clic_a100")

    sp = sub.add_parser("ranks", help="FLOPs vs speed rank analysis")
    sp.add_argument("--table", help="Table-1-shaped CSV (default: shipped published values)")
    sp.add_argument("--speed-a", default="mp_s_kodak_a100")
    sp.add_argument("--speed-b", default="mp_s_kodak_v100")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_ranks)

    sp = sub.add_parser("report", help="table and figure datasets with plots")
    sp.add_argument("--table")
    sp.add_argument("--curves", help="label,bpp,psnr CSV of RD curves")
    sp.add_argument("--ref", help="reference curve label")
    sp.add_argument("--points", help="label,kflops_px,rd_loss CSV for the loss-vs-FLOPs scatter")
    sp.add_argument("--range")
    sp.add_argument("--method", choices=("pchip", "cubic_fit"), default="pchip")
    sp.add_argument("--grid-points", type=int, default=50)
    sp.add_argument("--speed-a", default="mp_s_kodak_a100", choices=speed_cols)
    sp.add_argument("--speed-b", default="mp_s_kodak_v100", choices=speed_cols)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("replay", help="re-run a command from its manifest")
    sp.add_argument("manifest")
    sp.add_argument("--out", help="redirect the output path")
    sp.set_defaults(func=cmd_replay)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except RDCError as exc:
        print(f"rdc {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, IsADirectoryError) as exc:
        print(f"rdc {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
