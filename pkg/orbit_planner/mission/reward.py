"""
Composite orbit-design reward

Three weighted objectives (altitude coverage, collision safety, ground-target
reachability) plus eccentricity/inclination shaping, a soft bonus when the
objectives are jointly satisfied and a penalty when they are not. The final
value is clipped to [-10, 10].
"""

import math
from dataclasses import asdict, dataclass
from typing import Dict, Tuple

from ..schemas.mission import RewardWeights

REWARD_CLIP = 10.0
TARGET_DECAY = 3.0
ECCENTRICITY_TARGET = 0.025
ECCENTRICITY_WIDTH = 0.025
INCLINATION_WIDTH = 0.1  # rad


@dataclass(frozen=True)
class RewardInputs:
    mean_altitude: float  # km
    h_min: float
    h_max: float
    d_min: float  # km to the closest catalog orbit, inf when unconstrained
    d_safe: float
    d_target: float  # km from the ground track to the target
    sigma: float
    e: float
    i: float  # rad
    target_lat: float  # rad
    weights: RewardWeights = RewardWeights()


@dataclass(frozen=True)
class RewardBreakdown:
    r_c: float
    p_c: float
    r_s: float
    p_s: float
    r_t: float
    p_t: float
    r_ei: float
    p_ei: float
    base: float
    bonus: float
    penalty: float
    final: float

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)


def coverage_error(mean_altitude: float, h_min: float, h_max: float) -> float:
    """Distance (km) from the mean altitude to the band; 0 inside it"""
    if mean_altitude < h_min:
        return h_min - mean_altitude
    if mean_altitude > h_max:
        return mean_altitude - h_max
    return 0.0


def coverage_reward(mean_altitude: float, h_min: float, h_max: float) -> Tuple[float, float]:
    err_n = coverage_error(mean_altitude, h_min, h_max) / max(1e-6, h_max - h_min)
    return max(0.0, 1.0 - err_n), min(1.0, err_n)


def safety_reward(d_min: float, d_safe: float) -> Tuple[float, float]:
    if math.isinf(d_min):
        margin_n = 1.0
    else:
        margin_n = min(1.0, max(-1.0, (d_min - d_safe) / d_safe))
    r_s = (math.tanh(margin_n) + 1.0) / 2.0
    return r_s, 1.0 - r_s


def target_reward(d_target: float, sigma: float) -> Tuple[float, float]:
    r_t = math.exp(-TARGET_DECAY * d_target / sigma)
    return r_t, 1.0 - r_t


def element_shaping(e: float, i: float, target_lat: float) -> Tuple[float, float]:
    """
    Gaussian shaping toward e ~ 0.025 and an inclination covering the target

    Each half is worth at most 0.5, so r_ei lies in [0, 1] and
    p_ei = 1 - r_ei.
    """
    r_e = 0.5 * math.exp(-(((e - ECCENTRICITY_TARGET) / ECCENTRICITY_WIDTH) ** 2))
    reach = abs(target_lat)
    r_i = 0.5 if i >= reach else 0.5 * math.exp(-(((reach - i) / INCLINATION_WIDTH) ** 2))
    return r_e + r_i, (0.5 - r_e) + (0.5 - r_i)


def compose_reward(
    r_c: float,
    p_c: float,
    r_s: float,
    p_s: float,
    r_t: float,
    p_t: float,
    r_ei: float,
    p_ei: float,
    weights: RewardWeights = RewardWeights(),
) -> RewardBreakdown:
    """Weighted sum, joint bonus, joint penalty and final clip over given sub-terms"""
    base = weights.coverage * r_c + weights.safety * r_s + weights.target * r_t + r_ei
    mean_objective = (r_c + r_s + r_t) / 3.0
    bonus = 3.0 * mean_objective**3
    penalty = (1.0 - mean_objective) ** 2 * (p_s + p_c + p_t + p_ei) / 5.0
    final = min(REWARD_CLIP, max(-REWARD_CLIP, base + bonus - penalty))
    return RewardBreakdown(
        r_c=r_c, p_c=p_c, r_s=r_s, p_s=p_s, r_t=r_t, p_t=p_t, r_ei=r_ei, p_ei=p_ei,
        base=base, bonus=bonus, penalty=penalty, final=final,
    )


def total_reward(inputs: RewardInputs) -> RewardBreakdown:
    r_c, p_c = coverage_reward(inputs.mean_altitude, inputs.h_min, inputs.h_max)
    r_s, p_s = safety_reward(inputs.d_min, inputs.d_safe)
    r_t, p_t = target_reward(inputs.d_target, inputs.sigma)
    r_ei, p_ei = element_shaping(inputs.e, inputs.i, inputs.target_lat)
    return compose_reward(r_c, p_c, r_s, p_s, r_t, p_t, r_ei, p_ei, inputs.weights)
