"""
Shared fixtures: ISS element set, small catalogs, fast missions and tiny networks
"""

from pathlib import Path

import numpy as np
import pytest

from orbit_planner.learning.nn import Architecture
from orbit_planner.schemas.mission import MissionConfig
from orbit_planner.schemas.training import TrainerConfig

FIXTURES = Path(__file__).parent / "fixtures"

ISS_NAME = "ISS (ZARYA)"
ISS_LINE1 = "1 25544U 98067A   24146.63752315  .00009537  00000+0  17465-3 0  9998"
ISS_LINE2 = "2 25544  51.6422  41.9330 0005197 351.2436   8.8447 15.50954063448025"


@pytest.fixture
def iss_lines():
    return ISS_NAME, ISS_LINE1, ISS_LINE2


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def small_catalog_bytes() -> bytes:
    return (FIXTURES / "small_catalog.tle").read_bytes()


@pytest.fixture
def fast_mission() -> MissionConfig:
    """Default mission with a coarse ground track so episodes step quickly"""
    return MissionConfig(track_samples=200, orbit_samples=16, max_episode_steps=4)


@pytest.fixture
def tiny_architecture() -> Architecture:
    return Architecture(obs_dim=8, act_dim=5, hidden=(16, 16))


@pytest.fixture
def fast_a2c_config() -> TrainerConfig:
    return TrainerConfig.for_algorithm(
        "a2c", n_envs=2, n_steps=8, total_timesteps=32, hidden_sizes=(16, 16), n_eval_episodes=2, seed=3
    )


@pytest.fixture
def fast_ppo_config() -> TrainerConfig:
    return TrainerConfig.for_algorithm(
        "ppo", n_envs=2, n_steps=16, batch_size=8, n_epochs=2, total_timesteps=64,
        hidden_sizes=(16, 16), n_eval_episodes=2, seed=3,
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
