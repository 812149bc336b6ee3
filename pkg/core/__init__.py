"""posekit core: configuration, exceptions and logging"""

from .config import Config, load_config
from .exceptions import (
    PoseKitError,
    PoseFormatError,
    PoseOpsError,
    HandError,
    SegmentationError,
    StitchError,
    FswError,
    AdapterError,
    RenderError,
    ConfigError,
    MissingConfigError,
)
from .logging_config import setup_logging, LogContext

__all__ = [
    "Config",
    "load_config",
    "PoseKitError",
    "PoseFormatError",
    "PoseOpsError",
    "HandError",
    "SegmentationError",
    "StitchError",
    "FswError",
    "AdapterError",
    "RenderError",
    "ConfigError",
    "MissingConfigError",
    "setup_logging",
    "LogContext",
]
