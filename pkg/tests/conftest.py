import numpy as np
import pytest
import torch

from rdc.config import preset
from rdc.model import build_model

from _support import ACCEPTANCE_LINES, natural_images

TOY_PRESETS = ("toy_conv_hyperprior", "toy_conv_charm", "toy_elic_charm_swint", "toy_swint_hyperprior")


@pytest.fixture(scope="session")
def naturals():
    return natural_images()


@pytest.fixture(scope="session")
def toy_models():
    return {name: build_model(preset(name), seed=0).eval() for name in TOY_PRESETS}


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture(autouse=True)
def _torch_seed():
    torch.manual_seed(0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
