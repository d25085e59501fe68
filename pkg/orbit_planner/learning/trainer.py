"""
Training loop shared by A2C and PPO.

Each iteration collects one rollout over the vectorized environments,
computes advantages, applies the algorithm's update, optionally evaluates the
deterministic policy on a separate environment, and feeds the evaluation mean
to the plateau callback. One metrics row is written per rollout.
"""

import csv
import math
import uuid
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Union

import numpy as np

from ..astro.orbit import KeplerianElements, OrbitCatalog
from ..errors import OrbitPlannerError
from ..mission.env import ACTION_SIZE, OBSERVATION_SIZE, OrbitDesignEnv
from ..schemas.mission import MissionConfig
from ..schemas.training import TrainerConfig
from ..utils.logging import bind_run_context, clear_run_context, get_run_logger, log_rollout
from .a2c import a2c_update
from .buffer import RolloutBuffer
from .callback import CallbackState, force_relocate, plateau_check
from .evaluation import EvaluationResult, evaluate_policy
from .nn import Architecture, MlpParams, save_checkpoint
from .normalizer import RunningNormalizer
from .policy import ActorCriticPolicy
from .ppo import ppo_update
from .vec_env import DummyVecEnv

METRICS_HEADER = ("timesteps", "mean_ep_reward", "policy_loss", "value_loss", "entropy", "grad_norm", "interventions")
EPISODE_WINDOW = 100
EVAL_SEED_OFFSET = 10_000


def _format_cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".10g")


class MetricLog:
    """Append-only metrics CSV, flushed after every row"""

    def __init__(self, path: Optional[Union[str, Path]] = None):
        self.path = Path(path) if path else None
        self.rows: List[Dict[str, Any]] = []
        self._handle = None
        self._writer = None
        if self.path:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._handle = open(self.path, "w", newline="", encoding="utf-8")
            self._writer = csv.writer(self._handle, lineterminator="\n")
            self._writer.writerow(METRICS_HEADER)
            self._handle.flush()

    def append(self, row: Dict[str, Any]) -> None:
        self.rows.append(row)
        if self._writer:
            self._writer.writerow([_format_cell(row[key]) for key in METRICS_HEADER])
            self._handle.flush()

    def close(self) -> None:
        if self._handle:
            self._handle.close()
            self._handle = None

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()


class RolloutResult(NamedTuple):
    observations: np.ndarray  # normalized observations after the last step
    episodes: List[Dict[str, Any]]  # finished episodes (raw return, length, success)


def collect_rollout(
    policy: ActorCriticPolicy,
    envs: DummyVecEnv,
    buffer: RolloutBuffer,
    normalizer: RunningNormalizer,
    observations: np.ndarray,
    config: TrainerConfig,
) -> RolloutResult:
    """
    Fill the buffer with n_steps lockstep transitions and compute advantages

    Truncated (not terminated) episodes add gamma * V(terminal observation)
    to their gradient-path reward.
    """
    buffer.reset()
    episodes: List[Dict[str, Any]] = []
    while not buffer.full:
        sample = policy.act(observations)
        step = envs.step(sample.actions)
        rewards = normalizer.process_rewards(step.rewards, step.dones).copy()

        for k, info in enumerate(step.infos):
            if "episode" in info:
                episodes.append(info["episode"])
            if step.truncated[k] and not step.terminated[k]:
                terminal = normalizer.normalize_obs(info["terminal_observation"])
                rewards[k] += config.gamma * float(policy.value(terminal)[0])

        buffer.add(observations, sample.actions, sample.log_probs, sample.values, rewards, step.rewards, step.dones)
        observations = normalizer.observe(step.observations)

    buffer.compute_returns_and_advantage(policy.value(observations), config.gamma, config.gae_lambda)
    return RolloutResult(observations, episodes)


@dataclass
class TrainingResult:
    params: MlpParams
    metrics: List[Dict[str, Any]]
    timesteps: int
    interventions: int
    final_evaluation: Optional[EvaluationResult] = None
    best_evaluation: Optional[EvaluationResult] = None
    first_success_timestep: Optional[int] = None
    normalizer_state: Dict[str, Any] = field(default_factory=dict)


class Trainer:
    """
    Owns environments, policy, normalizer and optimizer state for one run

    Args:
        config: Algorithm hyperparameters and seed
        mission: Mission the environments score against
        catalog: Reference orbits for the safety objective
        output_dir: Where metrics.csv, model.ckpt and best.ckpt go (None: keep in memory)
        run_id: Identifier bound to every log line
    """

    def __init__(
        self,
        config: TrainerConfig,
        mission: Optional[MissionConfig] = None,
        catalog: Union[OrbitCatalog, Sequence[KeplerianElements], None] = None,
        output_dir: Optional[Union[str, Path]] = None,
        run_id: Optional[str] = None,
    ):
        self.config = config
        self.mission = mission or MissionConfig()
        self.catalog = catalog if isinstance(catalog, OrbitCatalog) else OrbitCatalog(catalog or (), self.mission.orbit_samples)
        self.output_dir = Path(output_dir) if output_dir else None
        self.run_id = run_id or uuid.uuid4().hex[:12]
        self.logger = get_run_logger(self.run_id)

        self.vec_env = DummyVecEnv([OrbitDesignEnv(self.mission, self.catalog) for _ in range(config.n_envs)])
        self.eval_env = OrbitDesignEnv(self.mission, self.catalog)

        self.rng = np.random.default_rng(config.seed)
        architecture = Architecture(
            obs_dim=OBSERVATION_SIZE,
            act_dim=ACTION_SIZE,
            hidden=tuple(config.hidden_sizes),
            shared_trunk=config.shared_trunk,
            log_std_init=config.log_std_init,
        )
        self.policy = ActorCriticPolicy.create(
            architecture, self.rng, use_sde=config.use_sde, sde_sample_freq=config.sde_sample_freq
        )
        self.normalizer = RunningNormalizer(
            OBSERVATION_SIZE,
            config.n_envs,
            gamma=config.gamma,
            clip_obs=config.clip_obs,
            clip_reward=config.clip_reward,
            norm_obs=config.normalize_observations,
            norm_reward=config.normalize_rewards,
        )
        self.buffer = RolloutBuffer(config.n_steps, config.n_envs, OBSERVATION_SIZE, ACTION_SIZE)
        self.callback = CallbackState(
            threshold=config.plateau_threshold,
            patience=config.plateau_patience,
            mode=config.plateau_mode,
            n_eval_episodes=config.n_eval_episodes,
        )
        self.optimizer_state = None
        self.timesteps = 0
        self.episode_rewards: deque = deque(maxlen=EPISODE_WINDOW)

    def _artifact(self, name: str) -> Optional[Path]:
        return self.output_dir / name if self.output_dir else None

    def _update(self) -> Dict[str, Any]:
        if self.config.algorithm == "a2c":
            params, self.optimizer_state, metrics = a2c_update(
                self.policy.params, self.buffer.transitions(), self.config, self.optimizer_state
            )
        else:
            params, self.optimizer_state, metrics = ppo_update(
                self.policy.params, self.buffer, self.config, self.rng, self.optimizer_state
            )
        self.policy.params = params
        return metrics

    def evaluate(self, n_episodes: Optional[int] = None) -> EvaluationResult:
        return evaluate_policy(
            self.policy.params,
            self.eval_env,
            n_episodes or self.config.n_eval_episodes,
            deterministic=True,
            normalizer=self.normalizer.frozen_copy(),
            seed=self.config.seed + EVAL_SEED_OFFSET,
        )

    def save(self, path: Path) -> Path:
        return save_checkpoint(
            path,
            self.policy.params,
            rng_state=self.rng.bit_generator.state,
            metadata={
                "algorithm": self.config.algorithm,
                "seed": self.config.seed,
                "timesteps": self.timesteps,
                "normalizer": self.normalizer.state_dict(),
            },
        )

    def train(self) -> TrainingResult:
        """
        Run until total_timesteps environment steps have been consumed

        The metrics CSV keeps every completed row if training aborts.
        """
        config = self.config
        bind_run_context(run_id=self.run_id, algorithm=config.algorithm, seed=config.seed)
        self.logger.info(
            "training_started",
            total_timesteps=config.total_timesteps,
            n_envs=config.n_envs,
            n_steps=config.n_steps,
            catalog_size=len(self.catalog),
        )

        best: Optional[EvaluationResult] = None
        first_success: Optional[int] = None
        iteration = 0
        observations = self.normalizer.observe(self.vec_env.reset(seed=config.seed))

        try:
            with MetricLog(self._artifact("metrics.csv")) as metric_log:
                while self.timesteps < config.total_timesteps:
                    iteration += 1
                    rollout = collect_rollout(
                        self.policy, self.vec_env, self.buffer, self.normalizer, observations, config
                    )
                    observations = rollout.observations
                    self.timesteps += config.rollout_size
                    self.episode_rewards.extend(episode["r"] for episode in rollout.episodes)

                    metrics = self._update()

                    evaluation = None
                    if iteration % config.eval_freq == 0:
                        evaluation = self.evaluate()
                        if first_success is None and evaluation.objectives_met_rate >= 1.0:
                            first_success = self.timesteps
                        if best is None or evaluation.mean_reward > best.mean_reward:
                            best = evaluation
                            if self.output_dir:
                                self.save(self.output_dir / "best.ckpt")
                        if plateau_check(self.callback, evaluation.mean_reward):
                            relocated = force_relocate(self.vec_env, self.callback, self.normalizer)
                            observations = self.normalizer.observe(relocated)
                            self.logger.info("plateau_intervention", interventions=self.callback.interventions)

                    mean_ep_reward = float(np.mean(self.episode_rewards)) if self.episode_rewards else math.nan
                    row = {
                        "timesteps": self.timesteps,
                        "mean_ep_reward": mean_ep_reward,
                        "policy_loss": metrics["policy_loss"],
                        "value_loss": metrics["value_loss"],
                        "entropy": metrics["entropy"],
                        "grad_norm": metrics["grad_norm"],
                        "interventions": self.callback.interventions,
                    }
                    metric_log.append(row)
                    log_rollout(
                        self.logger,
                        self.timesteps,
                        mean_ep_reward,
                        metrics["policy_loss"],
                        metrics["value_loss"],
                        self.callback.interventions,
                        iteration=iteration,
                        eval_mean_reward=None if evaluation is None else round(evaluation.mean_reward, 6),
                    )

            final = self.evaluate()
            if first_success is None and final.objectives_met_rate >= 1.0:
                first_success = self.timesteps
            if self.output_dir:
                self.save(self.output_dir / "model.ckpt")

        except OrbitPlannerError as exc:
            self.logger.error("training_failed", error=exc.message, timesteps=self.timesteps, **exc.details)
            raise
        finally:
            clear_run_context()

        self.logger.info(
            "training_completed",
            timesteps=self.timesteps,
            mean_reward=final.mean_reward,
            objectives_met_rate=final.objectives_met_rate,
            first_success_timestep=first_success,
            interventions=self.callback.interventions,
        )
        return TrainingResult(
            params=self.policy.params,
            metrics=metric_log.rows,
            timesteps=self.timesteps,
            interventions=self.callback.interventions,
            final_evaluation=final,
            best_evaluation=best,
            first_success_timestep=first_success,
            normalizer_state=self.normalizer.state_dict(),
        )


def train(
    config: TrainerConfig,
    mission: Optional[MissionConfig] = None,
    catalog: Union[OrbitCatalog, Sequence[KeplerianElements], None] = None,
    output_dir: Optional[Union[str, Path]] = None,
) -> TrainingResult:
    return Trainer(config, mission, catalog, output_dir).train()
