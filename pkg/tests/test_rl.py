import math

import numpy as np
import pytest

from orbit_planner.learning.a2c import a2c_loss_and_grads, a2c_update
from orbit_planner.learning.buffer import RolloutBuffer, Transitions, normalize_advantages
from orbit_planner.learning.callback import CallbackState, force_relocate, plateau_check, window_change
from orbit_planner.learning.evaluation import evaluate_policy
from orbit_planner.learning.nn import Architecture, MlpParams, forward, gaussian_log_prob, init_params
from orbit_planner.learning.normalizer import RunningNormalizer
from orbit_planner.learning.policy import ActorCriticPolicy
from orbit_planner.learning.ppo import approx_kl, ppo_loss_and_grads, ppo_update
from orbit_planner.learning.vec_env import DummyVecEnv
from orbit_planner.mission.env import OrbitDesignEnv
from orbit_planner.schemas.mission import MissionConfig
from orbit_planner.schemas.training import TrainerConfig

LINEAR = Architecture(obs_dim=1, act_dim=1, hidden=())


@pytest.fixture
def always_met_mission():
    return MissionConfig(sigma=20100.0, track_samples=20, orbit_samples=8, max_episode_steps=4)


@pytest.fixture
def never_met_mission():
    return MissionConfig(sigma=1e-3, track_samples=20, orbit_samples=8, max_episode_steps=4)


def _linear_params(w=0.5, b=0.1, log_std=-0.2, vw=0.3, vb=-0.4) -> MlpParams:
    return MlpParams(
        {
            "mean.W": np.array([[w]]),
            "mean.b": np.array([b]),
            "log_std": np.array([log_std]),
            "value.W": np.array([[vw]]),
            "value.b": np.array([vb]),
        },
        LINEAR,
    )


def _single(x=2.0, action=1.7, log_prob=0.0, advantage=1.5, ret=0.8) -> Transitions:
    return Transitions(
        observations=np.array([[x]]),
        actions=np.array([[action]]),
        log_probs=np.array([log_prob]),
        values=np.array([0.0]),
        advantages=np.array([advantage]),
        returns=np.array([ret]),
    )


class TestVecEnv:
    def test_seeds_per_env(self, fast_mission):
        envs = DummyVecEnv([OrbitDesignEnv(fast_mission) for _ in range(3)])
        first = envs.reset(seed=10)
        single, _ = OrbitDesignEnv(fast_mission).reset(seed=12)
        np.testing.assert_array_equal(first[2], OrbitDesignEnv(fast_mission).flatten(single))
        assert not np.array_equal(first[0], first[1])

    def test_auto_reset_on_termination(self, always_met_mission):
        envs = DummyVecEnv([OrbitDesignEnv(always_met_mission) for _ in range(2)])
        envs.reset(seed=0)
        step = envs.step(np.zeros((2, 5)))
        assert step.terminated.all()
        assert step.dones.all()
        for k, info in enumerate(step.infos):
            assert info["episode"]["l"] == 1
            assert info["episode"]["success"] is True
            assert info["episode"]["r"] == pytest.approx(step.rewards[k])
            np.testing.assert_allclose(info["terminal_observation"][:5], 0.5)
            assert not np.allclose(step.observations[k][:5], 0.5)

    def test_truncation_reports_episode(self, never_met_mission):
        envs = DummyVecEnv([OrbitDesignEnv(never_met_mission)])
        envs.reset(seed=0)
        steps = [envs.step(np.zeros((1, 5))) for _ in range(4)]
        assert [bool(s.truncated[0]) for s in steps] == [False, False, False, True]
        assert steps[-1].infos[0]["episode"]["l"] == 4
        assert "episode" not in steps[0].infos[0]


class TestPolicy:
    def test_frozen_noise_refreshes_after_freq(self):
        policy = ActorCriticPolicy.create(LINEAR, np.random.default_rng(0), use_sde=True, sde_sample_freq=3)
        obs = np.zeros((2, 1))
        actions = [policy.act(obs).actions for _ in range(7)]
        np.testing.assert_array_equal(actions[0], actions[1])
        np.testing.assert_array_equal(actions[0], actions[2])
        assert not np.array_equal(actions[2], actions[3])
        np.testing.assert_array_equal(actions[3], actions[5])
        assert not np.array_equal(actions[5], actions[6])

    def test_independent_noise_without_sde(self):
        policy = ActorCriticPolicy.create(LINEAR, np.random.default_rng(0), use_sde=False)
        obs = np.zeros((1, 1))
        assert not np.array_equal(policy.act(obs).actions, policy.act(obs).actions)

    def test_deterministic_is_mean(self, tiny_architecture, rng):
        policy = ActorCriticPolicy.create(tiny_architecture, rng)
        obs = rng.standard_normal((3, 8))
        sample = policy.act(obs, deterministic=True)
        np.testing.assert_array_equal(sample.actions, forward(policy.params, obs).mean)
        np.testing.assert_allclose(policy.predict(obs[0]), sample.actions[0], rtol=1e-12)
        assert sample.values.shape == (3,)


class TestA2C:
    def test_gradient_matches_hand_derivation(self):
        config = TrainerConfig.for_algorithm("a2c", normalize_advantage=False)
        params, batch = _linear_params(), _single()
        x, a, A, R = 2.0, 1.7, 1.5, 0.8
        mu, sigma = 0.5 * x + 0.1, math.exp(-0.2)
        value = 0.3 * x - 0.4

        _, grads = a2c_loss_and_grads(params, batch, config)
        score = (a - mu) / sigma**2
        assert grads["mean.b"][0] == pytest.approx(-A * score, abs=1e-8)
        assert grads["mean.W"][0, 0] == pytest.approx(-A * score * x, abs=1e-8)
        assert grads["log_std"][0] == pytest.approx(-A * ((a - mu) ** 2 / sigma**2 - 1.0) - config.ent_coef, abs=1e-8)
        assert grads["value.b"][0] == pytest.approx(2 * config.vf_coef * (value - R), abs=1e-8)
        assert grads["value.W"][0, 0] == pytest.approx(2 * config.vf_coef * (value - R) * x, abs=1e-8)

    def test_update_is_one_rmsprop_step(self):
        config = TrainerConfig.for_algorithm("a2c", normalize_advantage=False, max_grad_norm=1e6, learning_rate=1e-3)
        params, batch = _linear_params(), _single()
        _, grads = a2c_loss_and_grads(params, batch, config)
        new_params, state, metrics = a2c_update(params, batch, config)
        for name, value in params.items():
            g = grads[name]
            expected = value - 1e-3 * g / (np.sqrt(0.01 * g * g) + 1e-5)
            np.testing.assert_allclose(new_params[name], expected, rtol=0, atol=1e-12)
        assert metrics["grad_norm"] == pytest.approx(grads.global_norm())
        assert set(state.square_avg) == set(params)

    def test_entropy_coefficient_shifts_loss(self):
        params, batch = _linear_params(), _single()
        with_entropy, _ = a2c_loss_and_grads(params, batch, TrainerConfig.for_algorithm("a2c", ent_coef=0.03))
        without, _ = a2c_loss_and_grads(params, batch, TrainerConfig.for_algorithm("a2c", ent_coef=0.0))
        assert without["loss"] - with_entropy["loss"] == pytest.approx(0.03 * with_entropy["entropy"])

    def test_zero_advantage_has_no_policy_gradient(self):
        config = TrainerConfig.for_algorithm("a2c", normalize_advantage=False)
        terms, grads = a2c_loss_and_grads(_linear_params(), _single(advantage=0.0), config)
        assert terms["policy_loss"] == 0.0
        assert grads["mean.b"][0] == 0.0
        assert grads["log_std"][0] == pytest.approx(-config.ent_coef)

    def test_clipped_grad_norm_reported(self):
        config = TrainerConfig.for_algorithm("a2c", normalize_advantage=False)
        params, _, metrics = a2c_update(_linear_params(), _single(advantage=50.0, ret=-40.0), config)
        assert metrics["grad_norm"] <= 0.4 + 1e-9
        assert params.all_finite()

    def test_normalized_advantages_match_manual_normalization(self, rng):
        params = init_params(LINEAR, rng)
        batch = _ppo_buffer(params, rng).transitions()
        normalized = batch._replace(advantages=normalize_advantages(batch.advantages))
        assert normalized.size == batch.size == 16

        config = TrainerConfig.for_algorithm("a2c", normalize_advantage=True)
        new_params, _, metrics = a2c_update(params, batch, config)
        manual, _, _ = a2c_update(params, normalized, config.model_copy(update={"normalize_advantage": False}))
        for name in params:
            np.testing.assert_allclose(new_params[name], manual[name], rtol=0, atol=1e-12)
        assert np.isfinite(metrics["loss"])


def _ppo_buffer(params: MlpParams, rng: np.random.Generator, n_steps=8, n_envs=2) -> RolloutBuffer:
    buffer = RolloutBuffer(n_steps, n_envs, obs_dim=1, act_dim=1)
    for _ in range(n_steps):
        obs = np.zeros((n_envs, 1))
        out = forward(params, obs)
        actions = out.mean + np.exp(out.log_std) * rng.standard_normal((n_envs, 1))
        log_probs = gaussian_log_prob(out.mean, out.log_std, actions)
        rewards = rng.standard_normal(n_envs)
        buffer.add(obs, actions, log_probs, out.value, rewards, rewards, np.zeros(n_envs))
    buffer.compute_returns_and_advantage(np.zeros(n_envs), 0.99, 0.98)
    return buffer


class TestPPO:
    def test_zero_learning_rate_keeps_parameters(self, rng):
        params = init_params(LINEAR, rng)
        buffer = _ppo_buffer(params, rng)
        config = TrainerConfig.for_algorithm("ppo", n_steps=8, n_envs=2, batch_size=4, n_epochs=2, learning_rate=0.0)
        new_params, _, metrics = ppo_update(params, buffer, config, rng)
        for name, value in params.items():
            np.testing.assert_array_equal(new_params[name], value)
        assert metrics["approx_kl"] == pytest.approx(0.0, abs=1e-12)
        assert metrics["n_updates"] == 8
        assert not metrics["early_stopped"]

    def test_identity_update_surrogate(self, rng):
        params = init_params(LINEAR, rng)
        data = _ppo_buffer(params, rng).transitions()
        config = TrainerConfig.for_algorithm("ppo", n_steps=8, n_envs=2, batch_size=16)
        terms, _ = ppo_loss_and_grads(params, data, config)
        assert terms["policy_loss"] == pytest.approx(-float(np.mean(data.advantages)), abs=1e-12)
        assert terms["approx_kl"] == pytest.approx(0.0, abs=1e-12)
        assert terms["clip_fraction"] == 0.0

    def test_clipped_branch_selected(self):
        params = _linear_params()
        out = forward(params, np.array([[2.0]]))
        new_log_prob = gaussian_log_prob(out.mean, out.log_std, np.array([[1.7]]))[0]
        batch = _single(log_prob=new_log_prob - math.log(1.5), advantage=2.0)
        config = TrainerConfig.for_algorithm("ppo", n_steps=8, n_envs=2, batch_size=16, normalize_advantage=False)
        terms, grads = ppo_loss_and_grads(params, batch, config)
        assert terms["policy_loss"] == pytest.approx(-1.2 * 2.0)
        assert terms["clip_fraction"] == 1.0
        assert grads["mean.b"][0] == 0.0

    def test_kl_estimator(self):
        assert approx_kl(np.ones(4)) == 0.0
        assert approx_kl(np.array([0.5, 2.0])) > 0.0

    def test_early_stop_after_one_epoch(self, rng):
        params = init_params(LINEAR, rng)
        buffer = _ppo_buffer(params, rng)
        config = TrainerConfig.for_algorithm(
            "ppo", n_steps=8, n_envs=2, batch_size=16, n_epochs=4, learning_rate=2.0, target_kl=0.3
        )
        _, _, metrics = ppo_update(params, buffer, config, rng)
        assert metrics["early_stopped"]
        assert metrics["epochs_applied"] == 1
        assert metrics["n_updates"] == 1
        assert metrics["approx_kl"] > 0.3

    def test_update_with_normalized_advantages(self, rng):
        params = init_params(LINEAR, rng)
        buffer = _ppo_buffer(params, rng)
        config = TrainerConfig.for_algorithm("ppo", n_steps=8, n_envs=2, batch_size=4, n_epochs=2, learning_rate=1e-3)
        assert config.normalize_advantage
        new_params, _, metrics = ppo_update(params, buffer, config, rng)
        assert new_params.all_finite()
        assert metrics["n_updates"] >= 1
        assert any(not np.array_equal(new_params[name], params[name]) for name in params)


class TestPlateau:
    def test_flat_window_intervenes(self):
        state = CallbackState()
        assert [plateau_check(state, v) for v in (5.00, 5.10, 5.05)] == [False, False, True]
        assert len(state.window) == 0

    def test_rising_window(self):
        state = CallbackState()
        assert not any(plateau_check(state, v) for v in (1.0, 2.0, 3.0))

    def test_partial_window(self):
        state = CallbackState(patience=3)
        assert not plateau_check(state, 5.0)
        assert not plateau_check(state, 5.0)

    def test_window_capacity(self):
        state = CallbackState(patience=3)
        for v in (0.0, 10.0, 20.0, 30.0, 40.0):
            plateau_check(state, v)
        assert list(state.window) == [20.0, 30.0, 40.0]

    def test_consecutive_mode(self):
        assert window_change([5.0, 5.2, 5.4], "consecutive") == pytest.approx(0.2)
        assert window_change([5.0, 5.2, 5.4], "spread") == pytest.approx(0.4)
        state = CallbackState(mode="consecutive")
        assert [plateau_check(state, v) for v in (5.0, 5.2, 5.4)] == [False, False, True]
        with pytest.raises(ValueError):
            window_change([1.0, 2.0], "median")


class TestForceRelocate:
    def test_relocation_changes_orbits_and_keeps_statistics(self, fast_mission):
        envs = DummyVecEnv([OrbitDesignEnv(fast_mission) for _ in range(4)])
        normalizer = RunningNormalizer(obs_dim=8, n_envs=4)
        normalizer.observe(envs.reset(seed=0))
        mean_before = normalizer.obs_rms.mean.copy()
        state = CallbackState()

        changed = 0
        for _ in range(25):
            before = envs.observations.copy()
            after = force_relocate(envs, state, normalizer)
            changed += int(np.sum(np.any(before[:, :5] != after[:, :5], axis=1)))
        assert changed >= 25 * 3
        assert state.interventions == 25
        np.testing.assert_array_equal(normalizer.obs_rms.mean, mean_before)
        assert all(env.steps == 0 for env in envs.envs)

    def test_relocation_is_reproducible(self, fast_mission):
        def relocated():
            envs = DummyVecEnv([OrbitDesignEnv(fast_mission) for _ in range(2)])
            envs.reset(seed=4)
            return force_relocate(envs, CallbackState())

        np.testing.assert_array_equal(relocated(), relocated())


class TestEvaluatePolicy:
    def test_runs_requested_episodes(self, never_met_mission, tiny_architecture, rng):
        params = init_params(tiny_architecture, rng)
        result = evaluate_policy(params, OrbitDesignEnv(never_met_mission), n_eval_episodes=5, seed=1)
        assert result.episode_lengths == [4] * 5
        assert len(result.episode_rewards) == 5
        assert result.objectives_met_rate == 0.0

    def test_deterministic_repeatable(self, never_met_mission, tiny_architecture, rng):
        params = init_params(tiny_architecture, rng)
        env = OrbitDesignEnv(never_met_mission)
        assert evaluate_policy(params, env, 3, seed=9) == evaluate_policy(params, env, 3, seed=9)

    def test_all_objectives_met(self, always_met_mission, tiny_architecture, rng):
        params = init_params(tiny_architecture, rng)
        result = evaluate_policy(params, OrbitDesignEnv(always_met_mission), n_eval_episodes=3, seed=0)
        assert result.objectives_met_rate == 1.0
        assert result.episode_lengths == [1, 1, 1]

    def test_rejects_zero_episodes(self, never_met_mission, tiny_architecture, rng):
        with pytest.raises(ValueError):
            evaluate_policy(init_params(tiny_architecture, rng), OrbitDesignEnv(never_met_mission), 0)
