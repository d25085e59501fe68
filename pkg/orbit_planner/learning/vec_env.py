"""
Lockstep vectorization over orbit design environments

Environments are stepped sequentially in index order, so results never
depend on scheduling. A finished episode is reset within the same step; its
last observation travels in ``info["terminal_observation"]`` and its raw
return/length/success in ``info["episode"]``.
"""

from typing import Any, Dict, List, NamedTuple, Optional, Sequence

import numpy as np

from ..mission.env import OBSERVATION_SIZE, OrbitDesignEnv


class VecStep(NamedTuple):
    observations: np.ndarray  # (n_envs, obs_dim), flattened, unnormalized
    rewards: np.ndarray
    terminated: np.ndarray
    truncated: np.ndarray
    infos: List[Dict[str, Any]]

    @property
    def dones(self) -> np.ndarray:
        return self.terminated | self.truncated


class DummyVecEnv:
    def __init__(self, envs: Sequence[OrbitDesignEnv]):
        if not envs:
            raise ValueError("DummyVecEnv needs at least one environment")
        self.envs = list(envs)
        self.num_envs = len(self.envs)
        self.obs_dim = OBSERVATION_SIZE
        self.observations = np.zeros((self.num_envs, self.obs_dim))
        self._episode_returns = np.zeros(self.num_envs)
        self._episode_lengths = np.zeros(self.num_envs, dtype=int)

    def reset(self, seed: Optional[int] = None) -> np.ndarray:
        """Reset every env; env k is seeded with seed + k when a seed is given"""
        for k, env in enumerate(self.envs):
            obs, _ = env.reset(seed=None if seed is None else seed + k)
            self.observations[k] = env.flatten(obs)
        self._episode_returns[:] = 0.0
        self._episode_lengths[:] = 0
        return self.observations.copy()

    def step(self, actions: np.ndarray) -> VecStep:
        actions = np.asarray(actions, dtype=float)
        rewards = np.zeros(self.num_envs)
        terminated = np.zeros(self.num_envs, dtype=bool)
        truncated = np.zeros(self.num_envs, dtype=bool)
        infos: List[Dict[str, Any]] = []

        for k, env in enumerate(self.envs):
            result = env.step(actions[k])
            info = dict(result.info)
            rewards[k] = result.reward
            terminated[k] = result.terminated
            truncated[k] = result.truncated
            self._episode_returns[k] += result.reward
            self._episode_lengths[k] += 1
            flat = env.flatten(result.observation)

            if result.terminated or result.truncated:
                info["terminal_observation"] = flat
                info["episode"] = {
                    "r": float(self._episode_returns[k]),
                    "l": int(self._episode_lengths[k]),
                    "success": bool(result.info["all_objectives_met"]),
                }
                self._episode_returns[k] = 0.0
                self._episode_lengths[k] = 0
                obs, _ = env.reset()
                flat = env.flatten(obs)

            self.observations[k] = flat
            infos.append(info)

        return VecStep(self.observations.copy(), rewards, terminated, truncated, infos)

    def relocate(self) -> np.ndarray:
        """Re-randomize every env's orbit from its own rng stream, dropping open episodes"""
        return self.reset(seed=None)
