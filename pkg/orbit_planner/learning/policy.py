"""
Diagonal-Gaussian actor-critic policy over the network in nn.py
"""

from typing import NamedTuple, Optional

import numpy as np

from .nn import Architecture, MlpParams, forward, gaussian_log_prob, init_params


class PolicySample(NamedTuple):
    actions: np.ndarray  # (n_envs, act_dim), unclipped
    values: np.ndarray  # (n_envs,)
    log_probs: np.ndarray  # (n_envs,)


class ActorCriticPolicy:
    """
    Action sampling with optional frozen exploration noise

    With ``use_sde`` the standard-normal noise vector of each environment is
    held fixed and reused for ``sde_sample_freq`` consecutive samples before
    being redrawn, giving temporally correlated exploration.
    """

    def __init__(
        self,
        params: MlpParams,
        rng: np.random.Generator,
        use_sde: bool = True,
        sde_sample_freq: int = 75,
    ):
        self.params = params
        self.rng = rng
        self.use_sde = use_sde
        self.sde_sample_freq = sde_sample_freq
        self._noise: Optional[np.ndarray] = None
        self._samples_since_noise = 0

    @classmethod
    def create(cls, architecture: Architecture, rng: np.random.Generator, **kwargs) -> "ActorCriticPolicy":
        return cls(init_params(architecture, rng), rng, **kwargs)

    @property
    def architecture(self) -> Architecture:
        return self.params.architecture

    def reset_noise(self, n_envs: int) -> None:
        self._noise = self.rng.standard_normal((n_envs, self.architecture.act_dim))
        self._samples_since_noise = 0

    def _exploration_noise(self, n_envs: int) -> np.ndarray:
        if not self.use_sde:
            return self.rng.standard_normal((n_envs, self.architecture.act_dim))
        if self._noise is None or len(self._noise) != n_envs or self._samples_since_noise >= self.sde_sample_freq:
            self.reset_noise(n_envs)
        self._samples_since_noise += 1
        return self._noise

    def act(self, obs: np.ndarray, deterministic: bool = False) -> PolicySample:
        """Sample (or take the mean of) the action distribution for a batch of observations"""
        out = forward(self.params, np.atleast_2d(obs))
        if deterministic:
            actions = out.mean
        else:
            actions = out.mean + np.exp(out.log_std) * self._exploration_noise(len(out.mean))
        return PolicySample(actions, out.value, gaussian_log_prob(out.mean, out.log_std, actions))

    def predict(self, obs: np.ndarray) -> np.ndarray:
        """Deterministic action for one observation"""
        return forward(self.params, np.asarray(obs, dtype=float)).mean

    def value(self, obs: np.ndarray) -> np.ndarray:
        return forward(self.params, np.atleast_2d(obs)).value
