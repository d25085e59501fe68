"""
Orbit design environment

One action fully determines one orbit: the five normalized components are
mapped affinely onto the mission's element bounds. The observation carries
the resulting elements plus three objective flags (target reachable, altitude
in band, safe separation from the catalog).
"""

from typing import Any, Dict, NamedTuple, Optional, Sequence, Tuple, TypedDict, Union

import gymnasium as gym
import numpy as np
from gymnasium import spaces

from ..astro.constants import EARTH, PhysicalConstants
from ..astro.orbit import KeplerianElements, OrbitCatalog, mean_altitude, min_ground_distance
from ..errors import StepBeforeReset
from ..schemas.mission import MissionConfig
from .reward import RewardInputs, total_reward

OBSERVATION_SIZE = 8
ACTION_SIZE = 5
FLAG_KEYS = ("target_valid", "coverage_ok", "safety_ok")


class Observation(TypedDict):
    elements: np.ndarray  # (a, e, i, raan, arg_perigee) in km / rad
    target_valid: int
    coverage_ok: int
    safety_ok: int


class StepResult(NamedTuple):
    observation: Observation
    reward: float
    terminated: bool
    truncated: bool
    info: Dict[str, Any]


def rescale_action(action: Sequence[float], low: np.ndarray, high: np.ndarray) -> KeplerianElements:
    """Map an action in [-1, 1]^5 onto the element box; out-of-range components are clamped"""
    act = np.clip(np.asarray(action, dtype=float), -1.0, 1.0)
    values = low + (act + 1.0) / 2.0 * (high - low)
    return KeplerianElements.from_array(values)


def flatten_observation(obs: Observation, low: np.ndarray, high: np.ndarray) -> np.ndarray:
    """Min-max scale the elements by bounds and append the flags as 0/1"""
    scaled = (np.asarray(obs["elements"], dtype=float) - low) / (high - low)
    flags = [float(obs[key]) for key in FLAG_KEYS]
    return np.concatenate([scaled, flags])


def unflatten_elements(vector: Sequence[float], low: np.ndarray, high: np.ndarray) -> np.ndarray:
    return low + np.asarray(vector, dtype=float)[:ACTION_SIZE] * (high - low)


class OrbitDesignEnv(gym.Env):
    """
    Single-satellite orbit design MDP

    Args:
        mission: Mission thresholds, weights and element bounds
        catalog: Reference orbits for the safety objective (shared, read-only)
        constants: Physical constants
    """

    metadata = {"render_modes": []}

    def __init__(
        self,
        mission: Optional[MissionConfig] = None,
        catalog: Union[OrbitCatalog, Sequence[KeplerianElements], None] = None,
        constants: PhysicalConstants = EARTH,
    ):
        super().__init__()
        self.mission = mission or MissionConfig()
        self.constants = constants
        if isinstance(catalog, OrbitCatalog):
            self.catalog = catalog
        else:
            self.catalog = OrbitCatalog(catalog or (), self.mission.orbit_samples)

        self.low, self.high = self.mission.element_bounds_rad
        self.target = self.mission.target_point

        self.action_space = spaces.Box(-1.0, 1.0, shape=(ACTION_SIZE,), dtype=np.float64)
        self.observation_space = spaces.Dict(
            {
                "elements": spaces.Box(self.low, self.high, dtype=np.float64),
                "target_valid": spaces.Discrete(2),
                "coverage_ok": spaces.Discrete(2),
                "safety_ok": spaces.Discrete(2),
            }
        )

        self.elements: Optional[KeplerianElements] = None
        self.steps = 0
        self._observation: Optional[Observation] = None

    @property
    def observation(self) -> Optional[Observation]:
        return self._observation

    def max_eccentricity(self, a: float) -> float:
        """Largest e keeping the perigee above min_perigee_altitude"""
        return 1.0 - (self.constants.earth_radius + self.mission.min_perigee_altitude) / a

    def _clamp_eccentricity(self, el: KeplerianElements) -> KeplerianElements:
        e_low = self.low[1]
        e = float(np.clip(el.e, e_low, max(e_low, self.max_eccentricity(el.a))))
        if e == el.e:
            return el
        return KeplerianElements(el.a, e, el.i, el.raan, el.arg_perigee, el.true_anomaly)

    def _sample_elements(self, max_tries: int = 100) -> KeplerianElements:
        for _ in range(max_tries):
            values = self.np_random.uniform(self.low, self.high)
            if values[1] <= self.max_eccentricity(values[0]):
                return KeplerianElements.from_array(values)
        return self._clamp_eccentricity(KeplerianElements.from_array(values))

    def evaluate(self, el: KeplerianElements) -> Tuple[Observation, Dict[str, Any]]:
        """Score an element set against the mission without touching episode state"""
        mission = self.mission
        d_target = min_ground_distance(el, self.target, mission.track_window, mission.track_samples, self.constants)
        d_min = self.catalog.min_distance(el)
        altitude = mean_altitude(el.a, el.e, mission.mean_altitude_mode, self.constants)

        breakdown = total_reward(
            RewardInputs(
                mean_altitude=altitude,
                h_min=mission.h_min,
                h_max=mission.h_max,
                d_min=d_min,
                d_safe=mission.d_safe,
                d_target=d_target,
                sigma=mission.sigma,
                e=el.e,
                i=el.i,
                target_lat=self.target.lat,
                weights=mission.weights,
            )
        )
        observation: Observation = {
            "elements": el.as_array(),
            "target_valid": int(d_target <= mission.sigma),
            "coverage_ok": int(mission.h_min <= altitude <= mission.h_max),
            "safety_ok": int(d_min >= mission.d_safe),
        }
        info = {
            "breakdown": breakdown,
            "d_target": d_target,
            "d_min": d_min,
            "mean_altitude": altitude,
            "elements": el,
            "all_objectives_met": all(observation[key] for key in FLAG_KEYS),
        }
        return observation, info

    def reset(self, *, seed: Optional[int] = None, options: Optional[dict] = None):
        super().reset(seed=seed)
        self.elements = self._sample_elements()
        self.steps = 0
        self._observation, info = self.evaluate(self.elements)
        return self._observation, info

    def step(self, action) -> StepResult:
        if self._observation is None:
            raise StepBeforeReset()

        self.steps += 1
        self.elements = self._clamp_eccentricity(rescale_action(action, self.low, self.high))
        self._observation, info = self.evaluate(self.elements)

        terminated = bool(info["all_objectives_met"])
        truncated = self.steps >= self.mission.max_episode_steps
        return StepResult(self._observation, info["breakdown"].final, terminated, truncated, info)

    def flatten(self, obs: Observation) -> np.ndarray:
        return flatten_observation(obs, self.low, self.high)
