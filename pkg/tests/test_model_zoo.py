import pytest
import torch

from rdc.config import ModelConfig, preset, preset_names
from rdc.errors import ConfigError, ContractError, PaddingRequiredError
from rdc.model import build_model, count_parameters
from rdc.zoo import (
    build_analysis, build_hyper_analysis, build_hyper_synthesis, build_synthesis,
    inventory_params, layer_inventory,
)

from conftest import TOY_PRESETS


def test_config_document_round_trip():
    cfg = preset("model_b")
    doc = cfg.to_document()
    assert doc.splitlines() == sorted(doc.splitlines())
    again = ModelConfig.from_document(doc)
    assert again == cfg
    assert again.identity_hash() == cfg.identity_hash()


def test_config_hash_is_stable_and_sensitive():
    a, b = preset("toy_conv_charm"), preset("toy_conv_charm")
    assert a.identity_hash() == b.identity_hash()
    assert 0 <= a.identity_hash() < 2 ** 64
    assert a.replace(lmbda=0.05).identity_hash() != a.identity_hash()


def test_config_document_preset_and_overrides(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("# toy\npreset = toy_conv_hyperprior\nlambda = 0.05\n")
    cfg = ModelConfig.load(path)
    assert cfg.lmbda == 0.05
    assert cfg.latent_depth == preset("toy_conv_hyperprior").latent_depth


@pytest.mark.parametrize("doc", ["bogus = 1\n", "no equals sign\n", "preset = nope\n",
                                 "transform_family = mlp\n"])
def test_config_document_errors(doc):
    with pytest.raises(ConfigError):
        ModelConfig.from_document(doc)


def test_config_charm_divisibility():
    with pytest.raises(ConfigError):
        preset("toy_conv_charm").replace(num_slices=5)
    # hyperprior does not care about N
    preset("toy_conv_hyperprior").replace(num_slices=5)


def test_model_b_builds():
    cfg = preset("model_b")
    assert cfg.analysis_depths == (128, 256, 256) and cfg.num_residual_blocks == 2
    assert cfg.num_slices == 10 and cfg.lrp_merge == "concat_1x1"
    g_a = build_analysis(cfg)
    assert g_a.stride == 16


def test_latent_shape_256():
    cfg = preset("conv_hyperprior_conv")
    assert cfg.latent_depth == 192
    with torch.no_grad():
        y = build_analysis(cfg).eval()(torch.rand(1, 3, 256, 256))
        assert y.shape == (1, 192, 16, 16)
        x = build_synthesis(cfg).eval()(y)
    assert x.shape == (1, 3, 256, 256)
    assert x.min() >= 0 and x.max() <= 1


def test_padding_required():
    g_a = build_analysis(preset("toy_conv_hyperprior"))
    with pytest.raises(PaddingRequiredError):
        g_a(torch.rand(1, 3, 100, 100))
    with pytest.raises(ContractError):
        g_a(torch.rand(1, 4, 64, 64))


@pytest.mark.parametrize("name", TOY_PRESETS)
@pytest.mark.parametrize("hw", [(64, 64), (128, 64), (64, 192)])
def test_shape_round_trip(toy_models, name, hw):
    m = toy_models[name]
    x = torch.rand(1, 3, *hw)
    with torch.no_grad():
        y = m.g_a(x)
        z = m.h_a(y)
        assert y.shape == (1, m.cfg.latent_depth, hw[0] // 16, hw[1] // 16)
        assert z.shape == (1, m.cfg.hyper_depth, hw[0] // 64, hw[1] // 64)
        assert m.h_s(z).shape == (1, 2 * m.cfg.latent_depth, hw[0] // 16, hw[1] // 16)
        assert m.g_s(y).shape == x.shape


@pytest.mark.parametrize("name", TOY_PRESETS)
def test_eval_determinism(toy_models, name):
    m = toy_models[name]
    x = torch.rand(2, 3, 64, 64)
    with torch.no_grad():
        a = m(x, mode="round")
        b = m(x, mode="round")
    assert torch.equal(a["x_hat"], b["x_hat"]) and torch.equal(a["bpp"], b["bpp"])


def test_build_seed_determinism():
    a = build_model(preset("toy_elic_charm_swint"), seed=3)
    b = build_model(preset("toy_elic_charm_swint"), seed=3)
    for (ka, va), (kb, vb) in zip(a.state_dict().items(), b.state_dict().items()):
        assert ka == kb and torch.equal(va, vb)


def test_batch_independence_in_eval(toy_models):
    m = toy_models["toy_elic_charm_swint"]
    x = torch.rand(1, 3, 64, 64)
    with torch.no_grad():
        single = m.g_s(m.g_a(x))
        double = m.g_s(m.g_a(torch.cat([x, x])))
    assert torch.allclose(double[0], single[0], atol=1e-6) and torch.equal(double[0], double[1])


@pytest.mark.parametrize("name", ["toy_conv_hyperprior", "toy_elic_charm_swint", "elic_charm_swint",
                                  "model_b", "conv_hyperprior_conv"])
def test_mirror_property(name):
    cfg = preset(name)
    assert build_synthesis(cfg).resampling_channels() == build_analysis(cfg).resampling_channels()[::-1]


def test_synthesis_inventory_is_decode_only():
    inv = layer_inventory(build_synthesis(preset("toy_elic_charm_swint")))
    assert inv and all(r.phase == "decode_only" for r in inv)
    assert all(r.phase == "encode_only" for r in layer_inventory(build_analysis(preset("model_b"))))


def test_conv_analysis_inventory():
    inv = layer_inventory(build_analysis(preset("conv_hyperprior_conv")))
    assert [r.kind for r in inv] == ["conv", "gdn", "conv", "gdn", "conv", "gdn", "conv"]
    assert all(r.kernel == 5 and r.stride == 2 for r in inv if r.kind == "conv")


def test_empty_inventory():
    assert layer_inventory(torch.nn.Sequential()) == []


@pytest.mark.parametrize("name", sorted(preset_names()))
def test_inventory_params_match_enumeration(name):
    m = build_model(preset(name), seed=0)
    assert inventory_params(layer_inventory(m)) == count_parameters(m)
    for handle in (m.g_a, m.g_s, m.h_a, m.h_s):
        assert inventory_params(layer_inventory(handle)) == count_parameters(handle)


def test_inventory_layers_each_once():
    m = build_model(preset("toy_elic_charm_swint"), seed=0)
    names = [r.name for r in layer_inventory(m)]
    assert len(names) == len(set(names))


def _jacobian_check(handle, x):
    handle = handle.double().eval()
    x = x.double().requires_grad_(True)
    handle(x).mean().backward()
    g = x.grad
    gen = torch.Generator().manual_seed(1)
    worst = 0.0
    for _ in range(3):
        v = torch.randn(x.shape, generator=gen, dtype=torch.float64)
        v /= v.norm()
        eps = 1e-6
        with torch.no_grad():
            fd = (handle(x + eps * v).mean() - handle(x - eps * v).mean()) / (2 * eps)
        an = (g * v).sum()
        worst = max(worst, abs(float(fd - an)) / max(abs(float(an)), 1e-12))
    return worst


@pytest.mark.parametrize("family", ["conv", "elic", "swint"])
def test_jacobian_sanity(family):
    base = dict(analysis_depths=(8, 8, 8), latent_depth=8, hyper_depth=8, num_residual_blocks=1,
                swint_window=4, swint_stage_depths=(1, 1, 1, 1), swint_head_dim=4)
    cfg = ModelConfig(transform_family=family, **base)
    torch.manual_seed(0)
    g_a = build_analysis(cfg)
    x = torch.rand(1, 3, 64, 64)
    assert _jacobian_check(g_a, x) <= 1e-4
    g_s = build_synthesis(cfg).train()   # no output clamp while differentiating
    g_s.clamp_output = False
    assert _jacobian_check(g_s, torch.randn(1, 8, 4, 4)) <= 1e-4
