"""
Fixed-horizon rollout storage and generalized advantage estimation
"""

from typing import Iterator, NamedTuple, Optional, Tuple

import numpy as np

from ..errors import RolloutShapeError


class Transitions(NamedTuple):
    """A flat batch of transitions ready for a gradient step"""

    observations: np.ndarray  # (B, obs_dim)
    actions: np.ndarray  # (B, act_dim)
    log_probs: np.ndarray  # (B,)
    values: np.ndarray  # (B,)
    advantages: np.ndarray  # (B,)
    returns: np.ndarray  # (B,)

    def take(self, indices: np.ndarray) -> "Transitions":
        return Transitions(*(field[indices] for field in self))

    @property
    def size(self) -> int:
        return len(self.returns)


def compute_gae(
    rewards: np.ndarray,
    values: np.ndarray,
    dones: np.ndarray,
    bootstrap_value: np.ndarray,
    gamma: float,
    gae_lambda: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Generalized advantage estimates over one rollout

    Arrays are (T,) or (T, n_envs); dones[t] marks that the episode ended
    with the transition at t, so V(s_{t+1}) is not bootstrapped through it.

    Returns:
        (advantages, returns) with returns = advantages + values
    """
    rewards = np.asarray(rewards, dtype=float)
    values = np.asarray(values, dtype=float)
    dones = np.asarray(dones, dtype=float)
    bootstrap_value = np.asarray(bootstrap_value, dtype=float)
    if rewards.shape != values.shape or rewards.shape != dones.shape:
        raise RolloutShapeError(
            f"rewards {rewards.shape}, values {values.shape} and dones {dones.shape} must align"
        )
    if bootstrap_value.shape != rewards.shape[1:]:
        raise RolloutShapeError(f"bootstrap value shape {bootstrap_value.shape} != {rewards.shape[1:]}")

    advantages = np.zeros_like(rewards)
    last = np.zeros_like(bootstrap_value)
    next_value = bootstrap_value
    for t in reversed(range(len(rewards))):
        not_done = 1.0 - dones[t]
        delta = rewards[t] + gamma * next_value * not_done - values[t]
        last = delta + gamma * gae_lambda * not_done * last
        advantages[t] = last
        next_value = values[t]
    return advantages, advantages + values


def normalize_advantages(advantages: np.ndarray) -> np.ndarray:
    if len(advantages) < 2:
        return advantages
    return (advantages - advantages.mean()) / (advantages.std() + 1e-8)


class RolloutBuffer:
    """
    (n_steps, n_envs) trajectory storage

    ``rewards`` hold the gradient-path values (normalized, timeout
    bootstrapped); ``raw_rewards`` the environment's own values.
    """

    def __init__(self, n_steps: int, n_envs: int, obs_dim: int, act_dim: int):
        self.n_steps = n_steps
        self.n_envs = n_envs
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        self.reset()

    def reset(self) -> None:
        shape = (self.n_steps, self.n_envs)
        self.observations = np.zeros(shape + (self.obs_dim,))
        self.actions = np.zeros(shape + (self.act_dim,))
        self.log_probs = np.zeros(shape)
        self.values = np.zeros(shape)
        self.rewards = np.zeros(shape)
        self.raw_rewards = np.zeros(shape)
        self.dones = np.zeros(shape)
        self.bootstrap_values = np.zeros(self.n_envs)
        self.advantages: Optional[np.ndarray] = None
        self.returns: Optional[np.ndarray] = None
        self.pos = 0

    @property
    def full(self) -> bool:
        return self.pos == self.n_steps

    def __len__(self) -> int:
        return self.pos * self.n_envs

    def add(self, obs, actions, log_probs, values, rewards, raw_rewards, dones) -> None:
        if self.full:
            raise RolloutShapeError(f"rollout buffer already holds {self.n_steps} steps")
        t = self.pos
        self.observations[t] = obs
        self.actions[t] = actions
        self.log_probs[t] = log_probs
        self.values[t] = values
        self.rewards[t] = rewards
        self.raw_rewards[t] = raw_rewards
        self.dones[t] = dones
        self.pos += 1
        self.advantages = self.returns = None

    def compute_returns_and_advantage(self, bootstrap_values: np.ndarray, gamma: float, gae_lambda: float) -> None:
        if not self.full:
            raise RolloutShapeError(f"rollout incomplete: {self.pos}/{self.n_steps} steps")
        self.bootstrap_values = np.asarray(bootstrap_values, dtype=float)
        self.advantages, self.returns = compute_gae(
            self.rewards, self.values, self.dones, self.bootstrap_values, gamma, gae_lambda
        )

    def transitions(self) -> Transitions:
        """All transitions flattened step-major (t * n_envs + env)"""
        if self.advantages is None:
            raise RolloutShapeError("advantages not computed for this rollout")
        size = self.n_steps * self.n_envs
        return Transitions(
            observations=self.observations.reshape(size, self.obs_dim),
            actions=self.actions.reshape(size, self.act_dim),
            log_probs=self.log_probs.reshape(size),
            values=self.values.reshape(size),
            advantages=self.advantages.reshape(size),
            returns=self.returns.reshape(size),
        )

    def minibatches(self, batch_size: int, rng: np.random.Generator) -> Iterator[Transitions]:
        data = self.transitions()
        order = rng.permutation(data.size)
        for start in range(0, data.size, batch_size):
            yield data.take(order[start:start + batch_size])
