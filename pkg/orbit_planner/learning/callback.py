"""
Plateau detection on the windowed episodic reward and forced relocation
"""

from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Literal

import numpy as np

from .normalizer import RunningNormalizer
from .vec_env import DummyVecEnv

PlateauMode = Literal["spread", "consecutive"]


@dataclass
class CallbackState:
    threshold: float = 0.25
    patience: int = 3
    mode: PlateauMode = "spread"
    n_eval_episodes: int = 5
    interventions: int = 0
    window: Deque[float] = field(default_factory=deque)

    def __post_init__(self):
        self.window = deque(self.window, maxlen=self.patience)


def window_change(values, mode: PlateauMode = "spread") -> float:
    """max - min ("spread") or largest consecutive step ("consecutive")"""
    values = np.asarray(values, dtype=float)
    if mode == "spread":
        return float(values.max() - values.min())
    if mode == "consecutive":
        return float(np.max(np.abs(np.diff(values)))) if len(values) > 1 else 0.0
    raise ValueError(f"unknown plateau mode {mode!r}")


def plateau_check(state: CallbackState, new_mean_reward: float) -> bool:
    """
    Push a reward and report whether training has stalled

    Fires only on a full window whose change stays below the threshold; the
    window is cleared whenever it fires.
    """
    state.window.append(float(new_mean_reward))
    if len(state.window) < state.patience:
        return False
    if window_change(state.window, state.mode) < state.threshold:
        state.window.clear()
        return True
    return False


def force_relocate(envs: DummyVecEnv, state: CallbackState, normalizer: RunningNormalizer = None) -> np.ndarray:
    """
    Re-randomize every environment's orbit and count the intervention

    Normalizer statistics are kept; only the per-env discounted-return
    accumulators restart with the new episodes.
    """
    observations = envs.relocate()
    if normalizer is not None:
        normalizer.reset_returns()
    state.interventions += 1
    return observations
