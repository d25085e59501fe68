"""
`predict` command: one deterministic episode from a trained checkpoint
"""

import argparse
from typing import NamedTuple

import numpy as np

from ..astro.orbit import KeplerianElements
from ..learning.nn import Architecture, MlpParams, forward, load_checkpoint
from ..learning.normalizer import RunningNormalizer
from ..mission.env import ACTION_SIZE, OBSERVATION_SIZE, OrbitDesignEnv
from .train import build_catalog, resolve_mission

REPORT_LABELS = (
    "Semi-major axis (km)",
    "Eccentricity",
    "Inclination (rad)",
    "RAAN (rad)",
    "Argument of periapsis (rad)",
    "Cumulative Reward",
    "Objectives Met",
)


class Prediction(NamedTuple):
    elements: KeplerianElements
    cumulative_reward: float
    objectives_met: bool
    steps: int


def predict_episode(params: MlpParams, env: OrbitDesignEnv, normalizer: RunningNormalizer = None,
                    seed: int = 0, deterministic: bool = True) -> Prediction:
    """Act with the policy mean (or a seeded sample) until the episode ends"""
    rng = np.random.default_rng(seed)
    obs, _ = env.reset(seed=seed)
    total, steps, done = 0.0, 0, False
    info = {}
    while not done:
        x = env.flatten(obs)
        if normalizer is not None:
            x = normalizer.normalize_obs(x)
        out = forward(params, x)
        action = out.mean if deterministic else out.mean + np.exp(out.log_std) * rng.standard_normal(out.mean.shape)
        obs, reward, terminated, truncated, info = env.step(action)
        total += reward
        steps += 1
        done = terminated or truncated
    return Prediction(info["elements"], total, bool(info["all_objectives_met"]), steps)


def format_prediction_report(elements: KeplerianElements, cumulative_reward: float, objectives_met: bool) -> str:
    values = (
        f"{elements.a:.3f}",
        f"{elements.e:.3f}",
        f"{elements.i:.3f}",
        f"{elements.raan:.3f}",
        f"{elements.arg_perigee:.3f}",
        str(round(float(cumulative_reward), 6)),
        str(bool(objectives_met)),
    )
    width = max(len(label) for label in REPORT_LABELS) + 2
    lines = [f"{'Parameter':<{width}}Value"]
    lines.extend(f"{label:<{width}}{value}" for label, value in zip(REPORT_LABELS, values))
    return "\n".join(lines)


def run_predict(args: argparse.Namespace) -> int:
    expected = Architecture(obs_dim=OBSERVATION_SIZE, act_dim=ACTION_SIZE)
    params, header = load_checkpoint(args.checkpoint, expected=expected)

    normalizer = None
    normalizer_state = header.get("metadata", {}).get("normalizer")
    if normalizer_state:
        normalizer = RunningNormalizer.from_state_dict(normalizer_state)

    mission = resolve_mission(args.mission)
    catalog, _ = build_catalog(args.catalog, mission)
    env = OrbitDesignEnv(mission, catalog)

    prediction = predict_episode(params, env, normalizer, seed=args.seed, deterministic=args.deterministic)
    print(format_prediction_report(prediction.elements, prediction.cumulative_reward, prediction.objectives_met))
    return 0
