"""
Configuration System - pydantic settings loaded from an optional YAML file
"""

from pathlib import Path
from typing import Any, Dict, Literal, Optional, Union

import yaml
from pydantic import ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict

from .exceptions import ConfigError, MissingConfigError


class Config(BaseSettings):
    """Toolkit-wide defaults"""

    model_config = SettingsConfigDict(extra='ignore')

    # Logging
    log_dir: str = "logs"
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "WARNING"
    json_logs: bool = False

    # Savitzky-Golay smoothing
    savgol_window: int = 7
    savgol_polyorder: int = 2

    # Segment decoding
    threshold_b: float = 50.0
    threshold_o: float = 50.0
    default_scheme: Literal["BIO", "IO"] = "BIO"

    # Stitching
    padding_seconds: float = 0.2
    trim_flow_fraction: float = 0.2
    search_fraction: float = 0.25

    # Rendering
    canvas_fallback: int = 512

    # Benchmark
    bench_iterations: int = 5
    bench_warmup: int = 2

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        # Only explicit values: runs must not depend on the environment
        return (init_settings,)

    @field_validator('savgol_window')
    @classmethod
    def validate_savgol_window(cls, v: int) -> int:
        """Window must be odd and positive"""
        if v < 1 or v % 2 == 0:
            raise ValueError("savgol_window must be a positive odd number")
        return v

    @field_validator('threshold_b', 'threshold_o')
    @classmethod
    def validate_threshold(cls, v: float) -> float:
        if not 0 <= v <= 100:
            raise ValueError("thresholds must be between 0 and 100")
        return v

    @field_validator('trim_flow_fraction', 'search_fraction')
    @classmethod
    def validate_fraction(cls, v: float) -> float:
        if not 0 <= v <= 1:
            raise ValueError("fractions must be between 0 and 1")
        return v

    @field_validator('padding_seconds')
    @classmethod
    def validate_padding(cls, v: float) -> float:
        if v < 0:
            raise ValueError("padding_seconds must be non-negative")
        return v

    @field_validator('bench_iterations')
    @classmethod
    def validate_bench_iterations(cls, v: int) -> int:
        if v < 5:
            raise ValueError("bench_iterations must be at least 5")
        return v

    @model_validator(mode='after')
    def validate_polyorder(self) -> 'Config':
        """Polyorder must fit inside the window"""
        if not 0 <= self.savgol_polyorder < self.savgol_window:
            raise ValueError("savgol_polyorder must be in [0, savgol_window)")
        return self

    @property
    def logs_path(self) -> Path:
        return Path(self.log_dir)


def load_config(config_file: Optional[Union[str, Path]] = None, **overrides: Any) -> Config:
    """Load configuration from an optional YAML file plus explicit overrides"""
    data: Dict[str, Any] = {}
    if config_file is not None:
        path = Path(config_file)
        if not path.exists():
            raise MissingConfigError(f"Config file not found: {path}")
        try:
            loaded = yaml.safe_load(path.read_text(encoding='utf-8'))
        except yaml.YAMLError as e:
            raise ConfigError(f"Invalid YAML in {path}: {e}") from e
        if loaded is not None and not isinstance(loaded, dict):
            raise ConfigError(f"Config file must hold a mapping: {path}")
        data.update(loaded or {})
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return Config(**data)
    except ValidationError as e:
        raise ConfigError(str(e)) from e
