"""
Running observation/reward normalization
"""

import copy
from typing import Any, Dict, Tuple

import numpy as np


class RunningMeanStd:
    """Streaming mean/variance with the parallel (Chan et al.) merge"""

    def __init__(self, shape: Tuple[int, ...] = (), epsilon: float = 1e-4):
        self.mean = np.zeros(shape)
        self.var = np.ones(shape)
        self.count = epsilon

    def update(self, batch: np.ndarray) -> None:
        batch = np.asarray(batch, dtype=float)
        self.update_from_moments(batch.mean(axis=0), batch.var(axis=0), batch.shape[0])

    def update_from_moments(self, batch_mean: np.ndarray, batch_var: np.ndarray, batch_count: int) -> None:
        delta = batch_mean - self.mean
        total = self.count + batch_count
        m2 = self.var * self.count + batch_var * batch_count + delta**2 * self.count * batch_count / total
        self.mean = self.mean + delta * batch_count / total
        self.var = m2 / total
        self.count = total

    def state_dict(self) -> Dict[str, Any]:
        return {"mean": np.atleast_1d(self.mean).tolist(), "var": np.atleast_1d(self.var).tolist(), "count": self.count}

    def load_state_dict(self, state: Dict[str, Any]) -> None:
        shape = np.shape(self.mean)
        self.mean = np.asarray(state["mean"], dtype=float).reshape(shape)
        self.var = np.asarray(state["var"], dtype=float).reshape(shape)
        self.count = float(state["count"])


class RunningNormalizer:
    """
    Observation and reward scaling for a batch of n_envs environments

    Observations are centred and scaled by running statistics; rewards are
    only divided by the running std of the discounted return, never shifted.
    Statistics update only while ``training`` is set.
    """

    def __init__(
        self,
        obs_dim: int,
        n_envs: int,
        gamma: float = 0.99,
        clip_obs: float = 10.0,
        clip_reward: float = 10.0,
        epsilon: float = 1e-8,
        norm_obs: bool = True,
        norm_reward: bool = True,
    ):
        self.obs_rms = RunningMeanStd(shape=(obs_dim,))
        self.ret_rms = RunningMeanStd(shape=())
        self.returns = np.zeros(n_envs)
        self.gamma = gamma
        self.clip_obs = clip_obs
        self.clip_reward = clip_reward
        self.epsilon = epsilon
        self.norm_obs = norm_obs
        self.norm_reward = norm_reward
        self.training = True

    def observe(self, obs: np.ndarray) -> np.ndarray:
        """Update statistics (when training) and return the normalized batch"""
        if self.training and self.norm_obs:
            self.obs_rms.update(obs)
        return self.normalize_obs(obs)

    def normalize_obs(self, obs: np.ndarray) -> np.ndarray:
        if not self.norm_obs:
            return np.asarray(obs, dtype=float)
        scaled = (obs - self.obs_rms.mean) / np.sqrt(self.obs_rms.var + self.epsilon)
        return np.clip(scaled, -self.clip_obs, self.clip_obs)

    def process_rewards(self, rewards: np.ndarray, dones: np.ndarray) -> np.ndarray:
        rewards = np.asarray(rewards, dtype=float)
        if self.training and self.norm_reward:
            self.returns = self.returns * self.gamma + rewards
            self.ret_rms.update(self.returns)
        scaled = self.normalize_reward(rewards)
        self.returns = np.where(np.asarray(dones, dtype=bool), 0.0, self.returns)
        return scaled

    def normalize_reward(self, rewards: np.ndarray) -> np.ndarray:
        if not self.norm_reward:
            return np.asarray(rewards, dtype=float)
        return np.clip(rewards / np.sqrt(self.ret_rms.var + self.epsilon), -self.clip_reward, self.clip_reward)

    def reset_returns(self) -> None:
        self.returns = np.zeros_like(self.returns)

    def frozen_copy(self) -> "RunningNormalizer":
        frozen = copy.deepcopy(self)
        frozen.training = False
        return frozen

    def state_dict(self) -> Dict[str, Any]:
        return {"obs_rms": self.obs_rms.state_dict(), "ret_rms": self.ret_rms.state_dict(),
                "norm_obs": self.norm_obs, "norm_reward": self.norm_reward,
                "clip_obs": self.clip_obs, "clip_reward": self.clip_reward}

    @classmethod
    def from_state_dict(cls, state: Dict[str, Any], n_envs: int = 1) -> "RunningNormalizer":
        obs_dim = len(state["obs_rms"]["mean"])
        normalizer = cls(
            obs_dim, n_envs, clip_obs=state["clip_obs"], clip_reward=state["clip_reward"],
            norm_obs=state["norm_obs"], norm_reward=state["norm_reward"],
        )
        normalizer.obs_rms.load_state_dict(state["obs_rms"])
        normalizer.ret_rms.load_state_dict(state["ret_rms"])
        normalizer.training = False
        return normalizer
