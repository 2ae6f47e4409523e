"""
Toolkit settings management.

Loads configuration from environment variables (prefix ``GRIDSHIFT_``) and an
optional ``.env`` file, and provides access to dataset presets and storage
paths.
"""

import os
from pathlib import Path
from typing import Annotated, Optional
from pydantic import Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic_settings import NoDecode

from gridshift.__version__ import __version__
from .presets import DatasetPreset, get_preset


def default_tuning_grid(step: float = 0.05) -> list[float]:
    """Bandwidths step, 2*step, ..., 1.0 rounded to avoid float drift in the keys."""
    count = int(round(1.0 / step))
    return [round(step * i, 6) for i in range(1, count + 1)]


class Settings(BaseSettings):
    """Toolkit settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        # Look for .env in project root (parent of gridshift/)
        env_file=str((Path(__file__).parent.parent.parent / ".env").resolve()),
        env_file_encoding="utf-8",
        env_prefix="GRIDSHIFT_",
        case_sensitive=False,
        extra="ignore",
    )

    # Engine
    max_iterations: int = Field(
        default=1000,
        gt=0,
        description="Safety cap on GridShift iterations; a run hitting it is flagged as not converged",
    )
    check_invariants: bool = Field(
        default=False,
        description="Verify the member-set partition after every engine iteration (slow; for debugging)",
    )

    # Baselines
    mspp_tol_factor: float = Field(
        default=1e-6,
        gt=0,
        description="MS++ stops when the largest point displacement is below mspp_tol_factor * h",
    )
    mspp_max_iter: int = Field(default=300, gt=0, description="Iteration cap for MS++")
    vanilla_ms_max_points: int = Field(
        default=5000,
        gt=0,
        description="Largest dataset the O(n^2) vanilla mean shift oracle accepts",
    )

    # Metrics / tuning
    silhouette_cap: int = Field(
        default=10000,
        ge=2,
        description="Above this many points the silhouette used for tuning is computed on a seeded subsample",
    )
    tuning_grid: Annotated[list[float], NoDecode] = Field(
        default_factory=default_tuning_grid,
        description="Bandwidth grid for silhouette tuning. Comma-separated list in the environment.",
    )

    @field_validator("tuning_grid", mode="before")
    @classmethod
    def parse_tuning_grid(cls, v):
        if isinstance(v, str):
            return [float(x.strip()) for x in v.split(",") if x.strip()]
        return v

    @field_validator("tuning_grid")
    @classmethod
    def validate_tuning_grid(cls, v: list[float]) -> list[float]:
        if not v:
            raise ValueError("tuning_grid must not be empty")
        for h in v:
            if not 0.0 < h <= 1.0:
                raise ValueError(f"tuning_grid values must lie in (0, 1], got {h}")
        return v

    # Tracker defaults
    tracker_f: float = Field(default=1.0, ge=1.0, description="Search-region shrink factor f")
    tracker_eta: float = Field(default=1.0, gt=0, description="Centre convergence tolerance in pixels")
    tracker_max_inner_iters: int = Field(default=20, gt=0, description="Inner iterations per frame")

    # Reproducibility
    seed: int = Field(default=0, ge=0, description="Default seed for generators and subsampling")
    record_timings: bool = Field(
        default=True,
        description="Write wall-clock runtimes into artifacts. Disable for byte-identical outputs.",
    )

    # Storage
    data_path: Path = Field(
        default_factory=lambda: Path(__file__).parent.parent.parent / "data",
        description="Base directory for bundled datasets and default outputs.",
    )
    output_path: Optional[Path] = Field(
        default=None,
        description="Default directory for artifacts. Defaults to <data_path>/output.",
    )

    # Logging Configuration
    log_level: str = Field(default="INFO", description="Logging level")
    log_file: Optional[Path] = Field(
        default=None,
        description="Optional log file; when unset logs only go to stderr.",
    )

    # Application version
    version: str = Field(default=__version__, description="Toolkit version")

    @field_validator("data_path", "output_path", "log_file", mode="before")
    @classmethod
    def expand_path(cls, v):
        """Expand user home directory in paths."""
        if v is None or v == "":
            return None
        path_str = str(v)
        if path_str.startswith("~"):
            path_str = os.path.expanduser(path_str)
        return Path(path_str)

    @model_validator(mode="after")
    def set_derived_paths(self) -> "Settings":
        """Fill in paths that were not explicitly set, using data_path as base."""
        if self.output_path is None:
            self.output_path = self.data_path / "output"
        return self

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v):
        """Validate log level."""
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        v_upper = v.upper()
        if v_upper not in valid_levels:
            raise ValueError(f"Invalid log level. Must be one of: {valid_levels}")
        return v_upper

    def get_dataset_preset(self, name: str) -> DatasetPreset:
        """Get a benchmark dataset preset by name."""
        return get_preset(name)

    def ensure_directories(self):
        """Create the output directory if it doesn't exist."""
        self.output_path.mkdir(parents=True, exist_ok=True)
        if self.log_file:
            self.log_file.parent.mkdir(parents=True, exist_ok=True)


# Global settings instance
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """
    Get the global settings instance.

    Creates and caches the settings on first call.
    """
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def reset_settings():
    """Reset the global settings instance (mainly for testing)."""
    global _settings
    _settings = None
