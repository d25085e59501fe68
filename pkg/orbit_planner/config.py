"""
Configuration management for the LEO orbit planner
"""

from pathlib import Path
from typing import Optional
from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import Field


class Settings(BaseSettings):
    """Process settings loaded from environment variables"""

    model_config = SettingsConfigDict(
        env_file=".env",
        case_sensitive=False,
        populate_by_name=True,
        extra="ignore",
    )

    # App Configuration
    app_name: str = "LEO Orbit Planner"
    version: str = "1.0.0"
    env: str = Field(default="development", alias="ENV")
    log_level: str = Field(default="INFO", alias="LOG_LEVEL")

    # Catalog source
    catalog_url: str = Field(
        default="https://celestrak.org/NORAD/elements/gp.php?GROUP=active&FORMAT=tle",
        alias="ORBIT_CATALOG_URL",
    )
    http_timeout: float = Field(default=30.0, alias="HTTP_TIMEOUT")
    http_retries: int = Field(default=2, alias="HTTP_RETRIES")

    # Timezone used for run manifest timestamps
    timezone: str = Field(default="UTC", alias="TIMEZONE")

    # Default directory for training artifacts
    output_dir: Path = Field(default=Path("runs"), alias="OUTPUT_DIR")

    # Mission file used when a command gets no --mission
    default_mission_path: Optional[Path] = Field(default=None, alias="MISSION_CONFIG")

    @property
    def is_production(self) -> bool:
        return self.env.lower() == "production"

    @property
    def is_development(self) -> bool:
        return self.env.lower() == "development"


# Global settings instance
settings = Settings()
