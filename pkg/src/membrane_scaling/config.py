import logging
import re
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import AliasChoices, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsError

from .errors import ConfigError
from .models import Params
from .potential import well_names

logger = logging.getLogger(__name__)

SweepAxis = Literal["b", "sigma", "kappa", "lambda"]


class Settings(BaseSettings):
    # Numerics
    grid_n: int = Field(1024, ge=8)
    well: str = "quartic"
    max_iters: int = Field(2000, ge=1)
    tol_grad: float = Field(1e-6, gt=0)
    seed: int = 0

    # Execution
    workers: int = Field(1, ge=1)
    out_dir: Path = Path("out")

    log_level: str | int = "INFO"

    class Config:
        env_prefix = "MEMBRANE_"
        case_sensitive = False
        env_file = ".env"
        extra = 'ignore'


class SweepConfig(BaseSettings):
    """
    One parameter sweep, read from a flat key=value file.

    The parameter named by `axis` runs over a geometric grid from axis_min to
    axis_max; the other three stay at their fixed values.
    """

    axis: SweepAxis
    axis_min: float = Field(..., gt=0)
    axis_max: float = Field(..., gt=0)
    axis_points: int = Field(5, ge=1)

    b: float = Field(1.0, gt=0)
    sigma: float = Field(1.0, gt=0)
    kappa: float = Field(1.0, gt=0)
    lambda_: float = Field(1.0, gt=0, validation_alias=AliasChoices("lambda", "lambda_"))

    well: str = "quartic"
    grid_n: int = Field(1024, ge=8)
    seed: int = 0
    workers: int = Field(1, ge=1)
    max_iters: int = Field(2000, ge=1)
    tol_grad: float = Field(1e-6, gt=0)
    random_starts: int = Field(3, ge=0)

    # Regime constants; None uses sweep.default_constants
    c_small: Optional[float] = Field(None, gt=0)
    c_big: Optional[float] = Field(None, gt=0)

    check_refinement: bool = False
    expect_regime: Optional[Literal["supercritical", "subcritical", "gap"]] = None

    class Config:
        case_sensitive = False
        env_file = None
        extra = 'forbid'

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        return init_settings, dotenv_settings

    @model_validator(mode="after")
    def _check_ranges(self) -> "SweepConfig":
        if self.axis_min > self.axis_max:
            raise ValueError("axis_min must not exceed axis_max")
        if self.well not in well_names():
            raise ValueError(f"unknown well {self.well!r}; choose one of {well_names()}")
        if self.c_small is not None and self.c_big is not None and self.c_small > self.c_big:
            raise ValueError("c_small must not exceed c_big")
        return self

    def axis_values(self) -> list[float]:
        if self.axis_points == 1:
            return [float(self.axis_min)]
        return [float(v) for v in np.geomspace(self.axis_min, self.axis_max, self.axis_points)]

    def params_at(self, value: float) -> Params:
        values = {"b": self.b, "sigma": self.sigma, "kappa": self.kappa, "lambda": self.lambda_}
        values[self.axis] = value
        return Params(**values)


def _line_of(text: str, key: str) -> Optional[int]:
    pattern = re.compile(rf"^\s*{re.escape(key)}\s*=", re.IGNORECASE)
    for number, line in enumerate(text.splitlines(), start=1):
        if pattern.match(line):
            return number
    return None


def load_sweep_config(path: Path, **overrides) -> SweepConfig:
    """
    Read a sweep file; keyword overrides take precedence over the file.

    Raises:
        ConfigError: missing file or invalid keys, with the file line when known
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError("config file not found", path=path)
    text = path.read_text(encoding="utf-8")
    overrides = {k: v for k, v in overrides.items() if v is not None}
    try:
        config = SweepConfig(_env_file=path, **overrides)
    except ValidationError as e:
        first = e.errors()[0]
        key = str(first["loc"][0]) if first["loc"] else None
        if key == "lambda_":
            key = "lambda"
        line = _line_of(text, key) if key else None
        logger.error("Invalid sweep config %s: %s", path, e)
        raise ConfigError(first["msg"], path=path, key=key, line=line) from None
    except SettingsError as e:
        logger.error("Cannot parse sweep config %s: %s", path, e)
        raise ConfigError(str(e), path=path) from None
    logger.info("Loaded sweep over %s with %d points from %s", config.axis, config.axis_points, path)
    return config
