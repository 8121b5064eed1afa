import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from samwave.model import EncoderConfig, TrainConfig, pretrain_encoder
from samwave.synthdata import generate

settings.register_profile("default", suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# settings used by the end-to-end acceptance runs
ACCEPT_ENCODER = EncoderConfig(image_size=64, patch_size=8, embed_dim=32, depth=2, heads=2)
ACCEPT_PRETRAIN = TrainConfig(seed=0, epochs=40, lr=1e-3, adapter=False)
ACCEPT_ADAPT = dict(epochs=40, lr=3e-3, batch_size=8, gamma=16, dtype="f32", loss="cod")
ACCEPT_SEEDS = (0, 1, 2)

TINY_ENCODER = EncoderConfig(image_size=16, patch_size=4, embed_dim=8, depth=2, heads=2)


@pytest.fixture(scope="session")
def tiny_encoder():
    """A quickly pretrained 16 px encoder for unit-level training tests."""
    res = pretrain_encoder(generate("blobs", 500, 16, 16), TINY_ENCODER, TrainConfig(adapter=False, epochs=3))
    return res.encoder


@pytest.fixture(scope="session")
def tiny_data():
    return generate("camouflage", 1, 16, 16), generate("camouflage", 900, 8, 16)


@pytest.fixture(scope="session")
def accept_pretrain():
    """The acceptance-scale pretrained encoder (about half a minute)."""
    return pretrain_encoder(generate("blobs", 10_000, 200, 64), ACCEPT_ENCODER, ACCEPT_PRETRAIN,
                            holdout=generate("blobs", 20_000, 50, 64))


@pytest.fixture(scope="session")
def accept_data():
    return generate("camouflage", 1, 200, 64), generate("camouflage", 100_000, 50, 64)


def pytest_collection_modifyitems(config, items):
    # run the long end-to-end checks last
    items.sort(key=lambda it: "test_acceptance" in it.nodeid)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


# PASS/FAIL lines from the acceptance suite, repeated in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
