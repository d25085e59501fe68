"""
Trainer configuration and run manifest schemas
"""

from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..errors import ConfigError
from .mission import MissionConfig

Algorithm = Literal["a2c", "ppo"]

# Per-algorithm hyperparameters; everything else is shared
ALGORITHM_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "a2c": {"n_steps": 32},
    "ppo": {"n_steps": 2048, "batch_size": 1024, "n_epochs": 8},
}


class TrainerConfig(BaseModel):
    """Hyperparameters of one A2C or PPO run"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    algorithm: Algorithm = "a2c"
    gamma: float = Field(default=0.99, gt=0.0, le=1.0)
    gae_lambda: float = Field(default=0.98, ge=0.0, le=1.0)
    learning_rate: float = Field(default=1e-4, ge=0.0)
    ent_coef: float = Field(default=0.03, ge=0.0)
    vf_coef: float = Field(default=0.75, ge=0.0)
    max_grad_norm: float = Field(default=0.4, gt=0.0)
    normalize_advantage: bool = True

    n_steps: int = Field(default=32, ge=1)
    n_envs: int = Field(default=8, ge=1)
    total_timesteps: int = Field(default=10_000, ge=1)
    seed: int = 0

    # PPO
    batch_size: int = Field(default=1024, ge=1)
    n_epochs: int = Field(default=8, ge=1)
    clip_epsilon: float = Field(default=0.2, gt=0.0)
    target_kl: Optional[float] = Field(default=0.3, gt=0.0)

    # Optimizers (RMSProp for A2C, Adam for PPO)
    rms_prop_alpha: float = Field(default=0.99, gt=0.0, lt=1.0)
    rms_prop_eps: float = Field(default=1e-5, gt=0.0)
    adam_betas: Tuple[float, float] = (0.9, 0.999)
    adam_eps: float = Field(default=1e-8, gt=0.0)

    # Exploration
    use_sde: bool = True
    sde_sample_freq: int = Field(default=75, ge=1)

    # Network
    hidden_sizes: Tuple[int, ...] = (512, 256, 128)
    shared_trunk: bool = True
    log_std_init: float = 0.0

    # Normalization
    normalize_observations: bool = True
    normalize_rewards: bool = True
    clip_obs: float = Field(default=10.0, gt=0.0)
    clip_reward: float = Field(default=10.0, gt=0.0)

    # Plateau callback and evaluation
    plateau_threshold: float = Field(default=0.25, ge=0.0)
    plateau_patience: int = Field(default=3, ge=1)
    plateau_mode: Literal["spread", "consecutive"] = "spread"
    n_eval_episodes: int = Field(default=5, ge=1)
    eval_freq: int = Field(default=1, ge=1, description="Rollouts between evaluations")

    @model_validator(mode="after")
    def check_batching(self) -> "TrainerConfig":
        if self.algorithm == "ppo" and self.batch_size > self.n_steps * self.n_envs:
            raise ValueError(
                f"batch_size ({self.batch_size}) exceeds rollout size n_steps*n_envs ({self.n_steps * self.n_envs})"
            )
        return self

    @classmethod
    def for_algorithm(cls, algorithm: str, **overrides: Any) -> "TrainerConfig":
        """Defaults for the algorithm with any field overridden"""
        algorithm = algorithm.lower()
        if algorithm not in ALGORITHM_DEFAULTS:
            raise ConfigError(f"unknown algorithm '{algorithm}' (expected a2c or ppo)")
        values = {"algorithm": algorithm, **ALGORITHM_DEFAULTS[algorithm], **overrides}
        try:
            return cls(**values)
        except ValidationError as exc:
            first = exc.errors()[0]
            location = ".".join(str(part) for part in first["loc"]) or "<root>"
            raise ConfigError(f"invalid trainer config: {location}: {first['msg']}") from None

    @property
    def rollout_size(self) -> int:
        return self.n_steps * self.n_envs


class EvaluationSummary(BaseModel):
    mean_reward: float
    std_reward: float
    objectives_met_rate: float
    episodes: int


class CatalogSource(BaseModel):
    source: Optional[str] = None
    records: int = 0


class RunManifest(BaseModel):
    """Inputs and outcome of one training run; enough to replay it"""

    run_id: str
    trainer: TrainerConfig
    mission: MissionConfig
    seed: int
    catalog: CatalogSource
    started_at: str
    finished_at: Optional[str] = None
    timesteps: int = 0
    interventions: int = 0
    first_success_timestep: Optional[int] = None
    final_evaluation: Optional[EvaluationSummary] = None
    checkpoint: Optional[str] = None
    best_checkpoint: Optional[str] = None
    metrics: Optional[str] = None
    status: Literal["running", "completed", "failed"] = "running"
    error: Optional[str] = None

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.model_dump(mode="json"), sort_keys=True, default_flow_style=False)

    def write(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.write_text(self.to_yaml(), encoding="utf-8")
        return path

    @classmethod
    def read(cls, path: Union[str, Path]) -> "RunManifest":
        return cls.model_validate(yaml.safe_load(Path(path).read_text(encoding="utf-8")))


class ComparisonRow(BaseModel):
    algorithm: str
    seed: int
    first_success_timestep: Optional[int] = None
    final_reward: Optional[float] = None
    objectives_met: Optional[bool] = None
    error: Optional[str] = None


class ComparisonReport(BaseModel):
    rows: List[ComparisonRow]
    median_first_success: Dict[str, Optional[float]]
