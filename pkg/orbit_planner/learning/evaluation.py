"""
Policy evaluation on a separate environment
"""

from typing import List, NamedTuple, Optional

import numpy as np

from ..mission.env import OrbitDesignEnv
from .nn import MlpParams, forward
from .normalizer import RunningNormalizer


class EvaluationResult(NamedTuple):
    mean_reward: float
    std_reward: float
    objectives_met_rate: float
    episode_rewards: List[float]
    episode_lengths: List[int]


def evaluate_policy(
    params: MlpParams,
    eval_env: OrbitDesignEnv,
    n_eval_episodes: int = 5,
    deterministic: bool = True,
    normalizer: Optional[RunningNormalizer] = None,
    seed: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> EvaluationResult:
    """
    Run whole episodes and summarize their cumulative raw rewards

    Deterministic mode acts with the distribution mean. The normalizer, if
    given, is applied without updating its statistics. Passing a seed makes
    the result a pure function of the parameters.
    """
    if n_eval_episodes < 1:
        raise ValueError("n_eval_episodes must be at least 1")
    if not deterministic and rng is None:
        rng = np.random.default_rng(seed)

    rewards, lengths, successes = [], [], []
    for episode in range(n_eval_episodes):
        obs, _ = eval_env.reset(seed=seed if episode == 0 else None)
        total, length, done, met = 0.0, 0, False, False
        while not done:
            x = eval_env.flatten(obs)
            if normalizer is not None:
                x = normalizer.normalize_obs(x)
            out = forward(params, x)
            action = out.mean if deterministic else out.mean + np.exp(out.log_std) * rng.standard_normal(out.mean.shape)
            obs, reward, terminated, truncated, info = eval_env.step(action)
            total += reward
            length += 1
            met = bool(info["all_objectives_met"])
            done = terminated or truncated
        rewards.append(total)
        lengths.append(length)
        successes.append(met)

    return EvaluationResult(
        mean_reward=float(np.mean(rewards)),
        std_reward=float(np.std(rewards)),
        objectives_met_rate=float(np.mean(successes)),
        episode_rewards=rewards,
        episode_lengths=lengths,
    )
