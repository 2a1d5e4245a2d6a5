"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` (the lines are also
repeated in the session summary). Trained toy models are cached under
``.pytest_cache/rdc-trained`` (override with RDC_TEST_CACHE); the first run
trains them, which takes roughly 25 minutes on one CPU core.
"""

import csv
import json
import time

import numpy as np
import pytest
import torch
from PIL import Image

from rdc.analysis import RDCurve, bd_rate, read_curves, write_curves
from rdc.cli import main, read_image
from rdc.codec import decode_symbols, encode_image, tensor_to_image
from rdc.config import ModelConfig, preset
from rdc.entropy import CharmEntropyModel, SliceContext
from rdc.metrics import count_flops, model_flops
from rdc.model import build_model, count_parameters
from rdc.training import mse_255, rd_loss, read_log
from rdc.zoo import build_synthesis, layer_inventory
from rdc.zoo.layers import GDN, deconv, place, set_phase

from _support import eval_crops, natural_images, record, trained_toy
from oracles import bd_rate_trapezoid


# -- round trip through the command line ---------------------------------------

def test_round_trip_through_cli(tmp_path):
    rng = np.random.default_rng(2024)
    images = []
    for i in range(20):
        h, w = (int(v) for v in rng.integers(24, 200, 2))
        images.append((f"random{i:02d}", rng.integers(0, 256, (h, w, 3), dtype=np.uint8)))
    for i, im in enumerate(natural_images()[:5]):
        images.append((f"natural{i}", im))
    cfg_args = ["--config", "toy_conv_charm", "--seed", "7"]
    model = build_model(preset("toy_conv_charm"), seed=7)

    start = time.perf_counter()
    pixel_mismatch = symbol_mismatch = 0
    for name, image in images:
        src, rdc, out = tmp_path / f"{name}.png", tmp_path / f"{name}.rdc", tmp_path / f"{name}.out.png"
        Image.fromarray(image).save(src)
        assert main(["compress", str(src), *cfg_args, "--out", str(rdc)]) == 0
        assert main(["decompress", str(rdc), *cfg_args, "--out", str(out)]) == 0
        enc = encode_image(image, model)
        _, z_sym, y_syms, _ = decode_symbols(rdc.read_bytes(), model)
        pixel_mismatch += int(np.count_nonzero(read_image(out) != tensor_to_image(enc.reconstruction)))
        symbol_mismatch += int((z_sym != enc.z_symbols).sum())
        symbol_mismatch += sum(int((a != b).sum()) for a, b in zip(y_syms, enc.y_symbols))
    elapsed = time.perf_counter() - start
    ok = pixel_mismatch == 0 and symbol_mismatch == 0 and elapsed < 120
    record("round trip (20 random + 5 natural images via CLI)", ok,
           f"pixel mismatches {pixel_mismatch}, symbol mismatches {symbol_mismatch}, {elapsed:.1f} s")
    assert ok


# -- coder efficiency on trained toy models ------------------------------------

@pytest.mark.slow
@pytest.mark.parametrize("name", ["toy_conv_hyperprior", "toy_conv_charm"])
def test_coder_efficiency(name):
    model, _ = trained_toy(name)
    crops = eval_crops(12, (256, 256))
    worst, failures = 0.0, 0
    for image in crops:
        res = encode_image(image, model)
        over = (res.actual_bits - res.estimated_bits) / res.estimated_bits
        worst = max(worst, over)
        failures += res.actual_bits > 1.02 * res.estimated_bits + 256
    record(f"coder efficiency ({name}, {len(crops)} images)", failures == 0,
           f"worst overhead {100 * worst:.2f}% of estimate, {failures} images over 2% + 256 bits")
    assert failures == 0


# -- BD-rate oracle suite ------------------------------------------------------

def test_bd_rate_oracle_suite():
    ref = RDCurve.from_arrays("ref", [0.25, 0.5, 1.0, 2.0], [32, 35, 38, 41])
    test = RDCurve.from_arrays("test", [0.25 * 0.9, 0.5 * 0.85, 1.0 * 0.8, 2.0 * 0.8], [32, 35, 38, 41])
    identical = bd_rate(ref, ref).percent_rate_delta
    scaled = bd_rate(ref.scaled(1.30, "x"), ref).percent_rate_delta
    a, b = bd_rate(test, ref).percent_rate_delta, bd_rate(ref, test).percent_rate_delta
    anti = abs((1 + a / 100) * (1 + b / 100) - 1)
    oracle = bd_rate_trapezoid((test.bpp, test.psnr), (ref.bpp, ref.psnr))
    checks = {
        "identical": abs(identical) <= 1e-9,
        "x1.30": abs(scaled - 30.0) <= 0.01,
        "anti-symmetry": anti <= 1e-6,
        "4-point vs trapezoid": abs(a - oracle) <= 0.05 * abs(oracle) / 100,
    }
    record("BD-rate oracle suite", all(checks.values()),
           f"identical {identical:.2e}%, x1.30 {scaled:.4f}%, anti-symmetry {anti:.1e}, "
           f"4-point {a:.6f}% vs oracle {oracle:.6f}%")
    assert all(checks.values()), checks


# -- FLOPs counter fixtures ----------------------------------------------------

def test_flops_fixtures():
    def tagged(m):
        return set_phase(place(m, 1), "decode_only")

    conv = count_flops(layer_inventory(tagged(torch.nn.Conv2d(192, 192, 3, padding=1))), 512, 768)
    tconv = count_flops(layer_inventory(tagged(deconv(192, 3, 5, 2))), 512, 768)
    g_s = build_synthesis(ModelConfig(analysis_depths=(8, 8, 8), latent_depth=8, hyper_depth=8))
    toy = count_flops(layer_inventory(g_s), 64, 64)
    by_hand = 2 * 25 * 8 * 8 * 16 + 2 * 25 * 8 * 8 * 64 + 2 * 25 * 8 * 8 * 256 + 2 * 25 * 8 * 3 * 1024
    params_ok = all(
        model_flops(m, 64, 64).params == count_parameters(m)
        for m in (build_model(preset(n), seed=0) for n in ("model_b", "toy_elic_charm_swint", "toy_swint_hyperprior"))
    )
    checks = [
        abs(conv.kflops_per_px_decode - 663.552) < 1e-9,
        abs(tconv.kflops_per_px_decode - 7.2) < 1e-9,
        toy.decode_flops == by_hand,
        params_ok,
    ]
    record("FLOPs counter fixtures", all(checks),
           f"3x3 conv {conv.kflops_per_px_decode:.3f}, 5x5 tconv {tconv.kflops_per_px_decode:.3f} kFLOPs/px, "
           f"toy decoder {toy.decode_flops:.0f} vs {by_hand} FLOPs, params match {params_ok}")
    assert all(checks)


# -- gradient checks -----------------------------------------------------------

def _tiny(name):
    small = dict(analysis_depths=(8, 8, 8), latent_depth=8, hyper_depth=4, charm_hidden=(8, 8))
    if name in ("toy_conv_charm", "toy_elic_charm_swint"):
        small["num_slices"] = 2
    if name in ("toy_elic_charm_swint", "toy_swint_hyperprior"):
        small.update(swint_head_dim=4, num_residual_blocks=1)
    return preset(name).replace(**small)


def _jitter_off_kinks(model, gen):
    # move parameters into a generic position: GDN gamma starts exactly on its clamp bound
    with torch.no_grad():
        for m in model.modules():
            if isinstance(m, GDN):
                m.gamma.add_(0.05 + 0.05 * torch.rand(m.gamma.shape, generator=gen, dtype=m.gamma.dtype))
        for p in model.parameters():
            p.add_(1e-3 * torch.randn(p.shape, generator=gen, dtype=p.dtype))


@pytest.mark.parametrize("name", ["toy_conv_hyperprior", "toy_conv_charm", "toy_elic_charm_swint",
                                  "toy_swint_hyperprior"])
def test_gradient_checks(name):
    torch.manual_seed(0)
    model = build_model(_tiny(name), seed=0).double().train()
    gen = torch.Generator().manual_seed(0)
    _jitter_off_kinks(model, gen)
    x = torch.rand(1, 3, 64, 64, generator=gen, dtype=torch.float64)
    params = [p for p in model.parameters()]

    def terms():
        out = model(x, mode="noise", generator=torch.Generator().manual_seed(11))
        return out["bpp"], mse_255(x, out["x_hat"])

    worst = {}
    for k, label in enumerate(("rate", "distortion")):
        model.zero_grad()
        terms()[k].backward()
        direction = [torch.randn(p.shape, generator=gen, dtype=p.dtype) for p in params]
        norm = torch.sqrt(sum((d * d).sum() for d in direction))
        direction = [d / norm for d in direction]
        # parameters a term does not touch have no grad; their derivative is zero
        analytic = float(sum((p.grad * d).sum() for p, d in zip(params, direction) if p.grad is not None))
        eps = 1e-6
        with torch.no_grad():
            for p, d in zip(params, direction):
                p.add_(eps * d)
            plus = float(terms()[k])
            for p, d in zip(params, direction):
                p.sub_(2 * eps * d)
            minus = float(terms()[k])
            for p, d in zip(params, direction):
                p.add_(eps * d)
        numeric = (plus - minus) / (2 * eps)
        worst[label] = abs(numeric - analytic) / max(abs(analytic), 1e-12)
    ok = max(worst.values()) <= 1e-4
    record(f"gradient check ({name})", ok,
           f"rate rel err {worst['rate']:.1e}, distortion rel err {worst['distortion']:.1e}")
    assert ok


# -- CHARM causality -----------------------------------------------------------

@pytest.mark.parametrize("num_slices,latent", [(10, 320), (2, 32)])
def test_charm_causality(num_slices, latent):
    cfg = preset("toy_conv_charm").replace(num_slices=num_slices, latent_depth=latent, charm_hidden=(16, 16))
    torch.manual_seed(0)
    charm = CharmEntropyModel(cfg).double().eval()
    s = cfg.slice_depth
    gen = torch.Generator().manual_seed(1)
    feats = charm.features(torch.randn(1, cfg.num_params_channels, 3, 3, generator=gen, dtype=torch.float64))
    slices = [torch.randn(1, s, 3, 3, generator=gen, dtype=torch.float64) for _ in range(num_slices)]

    def all_params(sl):
        return [charm.slice_params(SliceContext(i, feats[i], sl[:i])) for i in range(num_slices)]

    leaks = missing = 0
    with torch.no_grad():
        base = all_params(slices)
        for i in range(num_slices):
            bumped = list(slices)
            bumped[i] = slices[i] + torch.randn(slices[i].shape, generator=gen, dtype=torch.float64)
            out = all_params(bumped)
            for j in range(num_slices):
                diff = max(float((out[j].mean - base[j].mean).abs().max()),
                           float((out[j].scale - base[j].scale).abs().max()))
                if j <= i and diff != 0.0:
                    leaks += 1
                if j > i and diff == 0.0:
                    missing += 1
    ok = leaks == 0
    record(f"CHARM causality (N={num_slices})", ok,
           f"{leaks} nonzero influences on slices <= i, {missing} later slices unaffected")
    assert ok and missing == 0


# -- toy training trend --------------------------------------------------------

def _rd_loss_on(model, images):
    model.eval()
    losses = []
    with torch.no_grad():
        for im in images:
            x = torch.from_numpy(im).permute(2, 0, 1)[None].float() / 255
            out = model(x, mode="round")
            losses.append(float(rd_loss(out["bpp"], mse_255(x, out["x_hat"]), model.cfg.lmbda)))
    return float(np.mean(losses))


@pytest.mark.slow
def test_toy_training_trend():
    hyper, d_hyper = trained_toy("toy_conv_hyperprior")
    charm, d_charm = trained_toy("toy_conv_charm")
    crops = eval_crops(12, (128, 128))
    l_hyper, l_charm = _rd_loss_on(hyper, crops), _rd_loss_on(charm, crops)
    log = [r[3] for r in read_log(d_hyper / "metrics.csv")]
    first, last = float(np.mean(log[:200])), float(np.mean(log[-200:]))
    ok = l_charm <= l_hyper
    record("toy training trend (CHARM <= hyperprior, 10k steps, soft)", ok,
           f"RD loss CHARM {l_charm:.4f} vs hyperprior {l_hyper:.4f}; "
           f"hyperprior smoothed loss {first:.2f} -> {last:.3f}")
    assert ok


# -- published table ranks -----------------------------------------------------

def test_table_ranks(tmp_path, capsys):
    out = tmp_path / "ranks.json"
    code = main(["ranks", "--speed-a", "mp_s_kodak_a100", "--speed-b", "mp_s_kodak_v100", "--out", str(out)])
    capsys.readouterr()
    res = json.loads(out.read_text())
    ok = code == 0 and res["kendall_tau_flops_vs_speed"] == pytest.approx(1.0) and res["inversions"] == []
    record("published table ranks", ok,
           f"tau {res['kendall_tau_flops_vs_speed']:.4f}, V100/A100 Kodak inversions {len(res['inversions'])}")
    assert ok


# -- anchor-curve ingestion over the published quality range -------------------

def test_anchor_bd_recompute(tmp_path, capsys):
    # No published curve samples are available, so anchors are synthetic stand-ins
    # shaped like typical Kodak curves; the check is the ingestion and range plumbing.
    bpg = RDCurve.from_arrays("BPG", [0.12, 0.22, 0.40, 0.70, 1.20, 2.00],
                              [29.0, 31.2, 33.8, 36.5, 39.4, 42.0])
    curves = {"BPG": bpg, "VTM": bpg.scaled(0.826, "VTM"), "ELIC": bpg.scaled(0.793, "ELIC"),
              "B": bpg.scaled(0.769, "B")}
    path = tmp_path / "anchors.csv"
    write_curves(curves.values(), path)
    ingested = read_curves(path)
    out = tmp_path / "bd.csv"
    code = main(["bdrate", str(path), "--ref", "BPG", "--range", "31.6:40.8", "--out", str(out)])
    capsys.readouterr()
    rows = {r["test"]: r for r in csv.DictReader(open(out))}
    expected = {k: (c.bpp[0] / bpg.bpp[0] - 1) * 100 for k, c in ingested.items() if k != "BPG"}
    got = {k: float(r["bd_rate_percent"]) for k, r in rows.items()}
    ranges = {(float(r["quality_lo"]), float(r["quality_hi"])) for r in rows.values()}
    ok = code == 0 and ranges == {(31.6, 40.8)} and all(abs(got[k] - v) < 1e-6 for k, v in expected.items())
    record("anchor curves ingested, BD over [31.6, 40.8] dB", ok,
           ", ".join(f"{k} {got[k]:+.2f}%" for k in sorted(got))
           + "; headline savings not reproducible at desk scale")
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-v", "-s"]))
