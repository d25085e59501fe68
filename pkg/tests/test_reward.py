import math

import numpy as np
import pytest

from orbit_planner.mission.reward import (
    RewardInputs,
    compose_reward,
    coverage_reward,
    element_shaping,
    safety_reward,
    target_reward,
    total_reward,
)
from orbit_planner.schemas.mission import RewardWeights


class TestSubRewards:
    @pytest.mark.parametrize(
        "altitude, expected",
        [(300.0, (1.0, 0.0)), (750.0, (1.0, 0.0)), (1200.0, (1.0, 0.0)), (2100.0, (0.0, 1.0)), (1650.0, (0.5, 0.5))],
    )
    def test_coverage(self, altitude, expected):
        assert coverage_reward(altitude, 300.0, 1200.0) == pytest.approx(expected)

    def test_coverage_below_band(self):
        r_c, p_c = coverage_reward(-600.0, 300.0, 1200.0)
        assert (r_c, p_c) == (0.0, 1.0)

    @pytest.mark.parametrize(
        "d_min, expected",
        [(10.0, 0.5), (20.0, 0.88079708), (0.0, 0.11920292), (math.inf, 0.88079708), (1e6, 0.88079708)],
    )
    def test_safety(self, d_min, expected):
        r_s, p_s = safety_reward(d_min, 10.0)
        assert r_s == pytest.approx(expected, abs=1e-8)
        assert r_s + p_s == 1.0

    @pytest.mark.parametrize("d_target, expected", [(0.0, 1.0), (500.0, 0.04978707), (500.0 / 3, 0.36787944)])
    def test_target(self, d_target, expected):
        r_t, p_t = target_reward(d_target, 500.0)
        assert r_t == pytest.approx(expected, abs=1e-8)
        assert r_t + p_t == 1.0

    def test_shaping_maxima(self):
        target_lat = math.radians(28.5)
        assert element_shaping(0.025, target_lat + 0.1, target_lat) == pytest.approx((1.0, 0.0))
        assert element_shaping(0.025, 0.0, 0.0) == pytest.approx((1.0, 0.0))

    def test_shaping_off_target_eccentricity(self):
        r_ei, p_ei = element_shaping(0.05, 1.0, math.radians(28.5))
        assert r_ei == pytest.approx(0.5 + 0.5 * math.exp(-1.0), abs=1e-9)
        assert r_ei + p_ei == pytest.approx(1.0)

    def test_shaping_low_inclination(self):
        r_ei, _ = element_shaping(0.025, 0.3, 0.5)
        assert r_ei == pytest.approx(0.5 + 0.5 * math.exp(-4.0))


class TestCompose:
    def test_perfect_score_hits_clip(self):
        breakdown = compose_reward(1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0)
        assert breakdown.base == 7.0
        assert breakdown.bonus == 3.0
        assert breakdown.penalty == 0.0
        assert breakdown.final == 10.0

    def test_worst_objectives(self):
        breakdown = compose_reward(0.0, 1.0, 0.0, 0.8808, 0.0, 1.0, 0.0, 1.0)
        assert breakdown.bonus == 0.0
        assert breakdown.final == pytest.approx(-0.77616, abs=1e-6)

    def test_half_objectives_unit_weights(self):
        weights = RewardWeights(coverage=1.0, safety=1.0, target=1.0)
        breakdown = compose_reward(0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.0, 1.0, weights)
        assert breakdown.base == pytest.approx(1.5)
        assert breakdown.bonus == pytest.approx(0.375)

    def test_clips_large_weights(self):
        weights = RewardWeights(coverage=50.0, safety=50.0, target=50.0)
        assert compose_reward(1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, weights).final == 10.0

    def test_weight_scaling_only_moves_base(self, rng):
        weights = RewardWeights(coverage=1.5, safety=0.5, target=2.5)
        for _ in range(50):
            r_c, r_s, r_t, r_ei = rng.uniform(0, 1, 4)
            args = (r_c, 1 - r_c, r_s, 1 - r_s, r_t, 1 - r_t, r_ei, 1 - r_ei)
            one = compose_reward(*args, weights)
            three = compose_reward(*args, weights.scaled(3.0))
            assert three.base - r_ei == pytest.approx(3.0 * (one.base - r_ei))
            assert three.bonus == one.bonus
            assert three.penalty == one.penalty


def _random_inputs(rng: np.random.Generator) -> RewardInputs:
    return RewardInputs(
        mean_altitude=rng.uniform(-500.0, 5000.0),
        h_min=300.0,
        h_max=1200.0,
        d_min=math.inf if rng.random() < 0.1 else rng.uniform(0.0, 200.0),
        d_safe=rng.uniform(1.0, 50.0),
        d_target=rng.uniform(0.0, 20000.0),
        sigma=rng.uniform(50.0, 1000.0),
        e=rng.uniform(0.0, 0.99),
        i=rng.uniform(0.0, math.pi),
        target_lat=rng.uniform(-math.pi / 2, math.pi / 2),
        weights=RewardWeights(
            coverage=rng.uniform(0.0, 5.0), safety=rng.uniform(0.0, 5.0), target=rng.uniform(0.0, 5.0)
        ),
    )


class TestTotalReward:
    def test_final_bounded(self, rng):
        for _ in range(100_000):
            breakdown = total_reward(_random_inputs(rng))
            assert -10.0 <= breakdown.final <= 10.0
            assert 0.0 <= breakdown.bonus <= 3.0

    def test_decomposition_is_reported(self):
        inputs = RewardInputs(
            mean_altitude=700.0, h_min=300.0, h_max=1200.0, d_min=math.inf, d_safe=10.0,
            d_target=0.0, sigma=500.0, e=0.025, i=1.0, target_lat=math.radians(28.5),
        )
        breakdown = total_reward(inputs)
        assert breakdown.r_c == 1.0
        assert breakdown.r_t == 1.0
        assert breakdown.r_s == pytest.approx(0.88079708)
        assert breakdown.final == pytest.approx(breakdown.base + breakdown.bonus - breakdown.penalty)
        assert set(breakdown.as_dict()) >= {"r_c", "p_c", "base", "bonus", "penalty", "final"}

    def test_target_reward_strictly_decreasing(self):
        distances = np.linspace(0.0, 5000.0, 200)
        values = [target_reward(d, 500.0)[0] for d in distances]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_safety_reward_monotone(self):
        distances = np.linspace(0.0, 40.0, 401)
        values = [safety_reward(d, 10.0)[0] for d in distances]
        assert all(a <= b for a, b in zip(values, values[1:]))
        inner = [v for d, v in zip(distances, values) if 0.0 < d < 20.0]
        assert all(a < b for a, b in zip(inner, inner[1:]))
