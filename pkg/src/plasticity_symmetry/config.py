"""
Central settings for verification runs.

A config file is plain key=value text; command-line flags override it.
"""
from __future__ import annotations

import logging
import os
from collections.abc import Mapping
from pathlib import Path

from dotenv import dotenv_values, load_dotenv
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator

LOG = logging.getLogger(__name__)

CONFIG_ENV = "PLASTICITY_CONFIG"


class ConfigError(ValueError):
    pass


class Settings(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    version: str = "0.1.0"

    rho: float = 1.0

    # Randomised zero tests
    trials: int = 32
    tol: float = 1e-9
    symmetry_tol: float = 1e-8
    adjoint_tol: float = 1e-8
    seed: int = 20240601

    degree: int = 5           # slot ladder t^0..t^degree for the commutation table
    bch_terms: int = 24

    # Solution residuals and quadrature
    residual_points: int = 100
    residual_gate: float = 1e-9
    quad_abs_tol: float = 1e-10
    quad_limit: int = 200

    # Classification
    root_window: tuple[float, float] = (-3.0, 3.0)
    grid_a: tuple[float, ...] = (-1.0, 0.5, 1.0, 2.0)
    grid_b: tuple[float, ...] = (0.0, 1.0)
    grid_c: tuple[float, ...] = (0.0, 1.0)

    log_level: str = "WARNING"
    record_timing: bool = False

    @field_validator("root_window", "grid_a", "grid_b", "grid_c", mode="before")
    @classmethod
    def _split(cls, value):
        if isinstance(value, str):
            return tuple(float(part) for part in value.split(",") if part.strip())
        return value

    @field_validator("log_level")
    @classmethod
    def _level(cls, value: str) -> str:
        level = value.upper()
        if level not in logging.getLevelNamesMapping():
            raise ValueError(f"unknown log level {value!r}")
        return level


settings = Settings()


def load_settings(
    path: str | Path | None = None,
    overrides: Mapping[str, object] | None = None,
) -> Settings:
    """
    Build settings from defaults, a config file and explicit overrides.

    Args:
        path:      key=value config file; falls back to $PLASTICITY_CONFIG.
        overrides: Values that win over the file (command-line flags).
                   None entries are ignored.

    Returns:
        A validated Settings instance.

    Raises:
        ConfigError: The file is missing, has unknown keys or bad values.
    """
    load_dotenv()
    path = path or os.environ.get(CONFIG_ENV)
    values: dict[str, object] = {}
    if path:
        file = Path(path)
        if not file.is_file():
            raise ConfigError(f"config file {file} not found")
        values.update({k.strip().lower(): v for k, v in dotenv_values(file).items()
                       if v is not None})
        LOG.debug("loaded %d settings from %s", len(values), file)
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return Settings.model_validate(values)
    except ValidationError as e:
        problems = "; ".join(f"{'.'.join(map(str, err['loc']))}: {err['msg']}"
                             for err in e.errors())
        raise ConfigError(f"invalid settings: {problems}") from e
