"""
Mission configuration schema and YAML loader
"""

import math
from pathlib import Path
from typing import Literal, Tuple, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..astro.orbit import GroundPoint
from ..errors import ConfigError

Bound = Tuple[float, float]


class RewardWeights(BaseModel):
    """Weights of the coverage, safety and target objectives"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    coverage: float = Field(default=2.0, ge=0.0)
    safety: float = Field(default=2.0, ge=0.0)
    target: float = Field(default=2.0, ge=0.0)

    def scaled(self, factor: float) -> "RewardWeights":
        return RewardWeights(coverage=self.coverage * factor, safety=self.safety * factor, target=self.target * factor)


class ElementBounds(BaseModel):
    """Search box for (a, e, i, raan, arg_perigee); angles in degrees"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    a: Bound = (6700.0, 7500.0)
    e: Bound = (0.0, 0.05)
    i_deg: Bound = (0.0, 100.0)
    raan_deg: Bound = (0.0, 360.0)
    arg_perigee_deg: Bound = (0.0, 360.0)

    @model_validator(mode="after")
    def check_ordering(self) -> "ElementBounds":
        for name in ("a", "e", "i_deg", "raan_deg", "arg_perigee_deg"):
            low, high = getattr(self, name)
            if not low < high:
                raise ValueError(f"{name}: lower bound {low} must be below upper bound {high}")
        if self.a[0] <= 0:
            raise ValueError("a: bounds must be positive")
        if self.e[0] < 0 or self.e[1] >= 1:
            raise ValueError("e: bounds must lie in [0, 1)")
        if self.i_deg[0] < 0 or self.i_deg[1] > 180:
            raise ValueError("i_deg: bounds must lie in [0, 180]")
        return self

    def low_high(self) -> Tuple[np.ndarray, np.ndarray]:
        """Bounds in physical units (km, -, rad, rad, rad)"""
        rows = [self.a, self.e] + [tuple(math.radians(v) for v in b) for b in (self.i_deg, self.raan_deg, self.arg_perigee_deg)]
        array = np.array(rows, dtype=float)
        return array[:, 0].copy(), array[:, 1].copy()


class MissionConfig(BaseModel):
    """
    Everything the environment needs to score an orbit

    Every field is optional; unknown keys are rejected.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    target_lat_deg: float = Field(default=28.5, ge=-90.0, le=90.0)
    target_lon_deg: float = Field(default=-80.6, ge=-180.0, le=360.0)
    sigma: float = Field(default=500.0, gt=0.0, description="Target validation radius (km)")
    h_min: float = Field(default=300.0, description="Lower altitude band edge (km)")
    h_max: float = Field(default=1200.0, description="Upper altitude band edge (km)")
    d_safe: float = Field(default=10.0, gt=0.0, description="Minimum separation from catalog orbits (km)")
    weights: RewardWeights = Field(default_factory=RewardWeights)
    element_bounds: ElementBounds = Field(default_factory=ElementBounds)

    max_episode_steps: int = Field(default=32, ge=1)
    track_window: float = Field(default=86400.0, gt=0.0)
    track_samples: int = Field(default=2000, ge=2)
    orbit_samples: int = Field(default=72, ge=8)
    min_perigee_altitude: float = Field(default=100.0, ge=0.0)
    mean_altitude_mode: Literal["mean_radius", "semi_major_axis"] = "mean_radius"

    @model_validator(mode="after")
    def check_band(self) -> "MissionConfig":
        if not self.h_min < self.h_max:
            raise ValueError(f"h_min ({self.h_min}) must be below h_max ({self.h_max})")
        return self

    @field_validator("target_lon_deg")
    @classmethod
    def wrap_longitude(cls, value: float) -> float:
        return ((value + 180.0) % 360.0) - 180.0 if value > 180.0 else value

    @property
    def target_point(self) -> GroundPoint:
        return GroundPoint.from_degrees(self.target_lat_deg, self.target_lon_deg)

    @property
    def element_bounds_rad(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.element_bounds.low_high()

    def to_yaml_dict(self) -> dict:
        return self.model_dump(mode="json")


def _describe_validation_error(exc: ValidationError) -> str:
    first = exc.errors()[0]
    location = ".".join(str(part) for part in first["loc"]) or "<root>"
    if first["type"] == "extra_forbidden":
        return f"unknown key '{location}'"
    return f"{location}: {first['msg']}"


def mission_from_dict(data: dict, source: str = "<mission>") -> MissionConfig:
    try:
        return MissionConfig.model_validate(data or {})
    except ValidationError as exc:
        raise ConfigError(f"invalid mission config {source}: {_describe_validation_error(exc)}") from None


def load_mission(path: Union[str, Path, None]) -> MissionConfig:
    """
    Load a mission file; None gives the default mission

    Raises:
        ConfigError: Missing file, unparsable YAML, unknown key or invalid value
    """
    if path is None:
        return MissionConfig()

    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"mission config not found: {path}")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"mission config {path} is not valid YAML: {exc}") from None
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"mission config {path} must be a mapping")
    return mission_from_dict(data, str(path))
