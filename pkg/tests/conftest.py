import os
import shutil
import tempfile
from collections.abc import Generator
from pathlib import Path

import numpy as np
import pytest

from rdstc.channel import ChannelSet, NoiseModel, draw_channel_set
from rdstc.config import SimConfig
from rdstc.stc_relay import AmplifyGain, RandomizedCode


def is_ci() -> bool:
    return os.getenv("CI") == "true"


def pytest_configure(config: pytest.Config):
    if is_ci():
        config.option.log_cli_level = "verbose"


@pytest.fixture(autouse=True)
def no_output(capsys):
    yield

    # Verify that no output was printed to stdout when running tests on CI
    if is_ci():
        out, _ = capsys.readouterr()
        if out:
            pytest.fail(f"Output captured: {out}")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture(params=[1, 2], ids=["one-relay", "two-relays"])
def n_r(request) -> int:
    return request.param


@pytest.fixture
def channels(rng: np.random.Generator, n_r: int) -> ChannelSet:
    return draw_channel_set(2, n_r, rng)


@pytest.fixture
def noise() -> NoiseModel:
    return NoiseModel.from_snr_db(10.0)


@pytest.fixture
def gain(noise: NoiseModel, n_r: int) -> AmplifyGain:
    return AmplifyGain.fixed(2, noise, n_r=n_r)


@pytest.fixture
def code(rng: np.random.Generator, n_r: int) -> RandomizedCode:
    return RandomizedCode.random(n_r, 4.0, rng)


@pytest.fixture
def quick_config() -> SimConfig:
    """A sweep small enough for unit tests."""
    return SimConfig(
        snr_db_list=[0.0, 10.0],
        min_trials=4,
        max_trials=4,
        min_bit_errors=1,
        batch_size=2,
        pilots=40,
        payload=20,
    )


@pytest.fixture(scope="class", autouse=True)
def clean_dir() -> Generator[Path, None, None]:
    old_cwd = os.getcwd()
    new_path = tempfile.mkdtemp()
    os.chdir(new_path)
    yield Path(new_path)
    os.chdir(old_cwd)
    shutil.rmtree(new_path)
