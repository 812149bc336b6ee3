"""
Unit tests for core module
"""

import json
import logging
from unittest.mock import patch

import pytest

from core.config import Config, load_config
from core.exceptions import (
    PoseKitError,
    PoseFormatError,
    TruncatedFileError,
    BadVersionError,
    PoseOpsError,
    ZeroFpsError,
    HandError,
    InsufficientObservationsError,
    SegmentationError,
    EmptyGoldError,
    StitchError,
    NoSharedPointsError,
    FswError,
    MalformedStreamError,
    AdapterError,
    BenchIOError,
    RenderError,
    FrameOutOfRangeError,
    ConfigError,
    MissingConfigError,
)
from core.logging_config import JSONFormatter, LogContext, setup_logging


class TestConfig:
    """Tests for Config class"""

    def test_config_defaults(self):
        """Should have sensible defaults"""
        config = Config()
        assert config.savgol_window == 7
        assert config.savgol_polyorder == 2
        assert config.threshold_b == 50.0
        assert config.threshold_o == 50.0
        assert config.padding_seconds == 0.2
        assert config.bench_iterations == 5
        assert config.default_scheme == "BIO"

    def test_config_ignores_environment(self):
        """Environment variables must not change defaults"""
        with patch.dict('os.environ', {'SAVGOL_WINDOW': '9', 'LOG_LEVEL': 'DEBUG'}):
            config = Config()
            assert config.savgol_window == 7
            assert config.log_level == "WARNING"

    def test_load_config_from_yaml(self, tmp_path):
        """Should read values from a YAML file"""
        path = tmp_path / "posekit.yaml"
        path.write_text("savgol_window: 9\nthreshold_b: 60\n", encoding="utf-8")
        config = load_config(path)
        assert config.savgol_window == 9
        assert config.threshold_b == 60.0

    def test_overrides_win_over_file(self, tmp_path):
        """Explicit overrides beat file values; None overrides are ignored"""
        path = tmp_path / "posekit.yaml"
        path.write_text("log_level: INFO\n", encoding="utf-8")
        config = load_config(path, log_level="DEBUG", json_logs=None)
        assert config.log_level == "DEBUG"
        assert config.json_logs is False

    def test_empty_file_gives_defaults(self, tmp_path):
        path = tmp_path / "empty.yaml"
        path.write_text("", encoding="utf-8")
        assert load_config(path) == Config()


class TestConfigValidation:
    """Tests for config validation"""

    def test_missing_file_raises(self, tmp_path):
        """Should raise if the config file does not exist"""
        with pytest.raises(MissingConfigError):
            load_config(tmp_path / "nope.yaml")

    def test_non_mapping_raises(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_invalid_yaml_raises(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("savgol_window: [1, 2\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_config(path)

    @pytest.mark.parametrize("overrides", [
        {"savgol_window": 8},
        {"savgol_window": 5, "savgol_polyorder": 5},
        {"threshold_b": 101},
        {"threshold_o": -1},
        {"trim_flow_fraction": 1.5},
        {"padding_seconds": -0.1},
        {"bench_iterations": 4},
    ])
    def test_rejects_invalid_values(self, overrides):
        """Out-of-range values raise ConfigError"""
        with pytest.raises(ConfigError):
            load_config(**overrides)


class TestExceptions:
    """Tests for custom exceptions"""

    def test_base_error(self):
        """Should create base error"""
        error = PoseKitError("test error")
        assert str(error) == "test error"

    @pytest.mark.parametrize("leaf, base", [
        (BadVersionError, PoseFormatError),
        (ZeroFpsError, PoseOpsError),
        (InsufficientObservationsError, HandError),
        (EmptyGoldError, SegmentationError),
        (NoSharedPointsError, StitchError),
        (BenchIOError, AdapterError),
        (FrameOutOfRangeError, RenderError),
        (MissingConfigError, ConfigError),
    ])
    def test_hierarchy(self, leaf, base):
        """Every leaf error derives from its module base and the root"""
        error = leaf("failed")
        assert isinstance(error, base)
        assert isinstance(error, PoseKitError)

    def test_truncated_file_keeps_stride(self):
        """Should preserve stride details in TruncatedFileError"""
        error = TruncatedFileError("short", expected_stride=24, remaining=10)
        assert error.expected_stride == 24
        assert error.remaining == 10
        assert isinstance(error, PoseFormatError)

    def test_fsw_error_keeps_position(self):
        error = MalformedStreamError("bad token", position=7)
        assert error.position == 7
        assert isinstance(error, FswError)


class TestLogging:
    """Tests for logging helpers"""

    def test_json_formatter_includes_extras(self):
        """JSON records carry known extra fields"""
        record = logging.LogRecord("posekit.test", logging.INFO, __file__, 1, "hello %s", ("world",), None)
        record.operation = "bench"
        record.case = 1000
        payload = json.loads(JSONFormatter().format(record))
        assert payload["message"] == "hello world"
        assert payload["level"] == "INFO"
        assert payload["operation"] == "bench"
        assert payload["case"] == 1000
        assert payload["timestamp"].endswith("Z")

    def test_log_context_sets_and_restores_fields(self):
        """Fields exist inside the block only"""
        logger = logging.getLogger("posekit.test")
        factory = logging.getLogRecordFactory()
        with LogContext(logger, operation="stitch", frames=12):
            record = logging.getLogRecordFactory()("x", logging.INFO, __file__, 1, "m", (), None)
            assert record.operation == "stitch"
            assert record.frames == 12
        assert logging.getLogRecordFactory() is factory

    def test_setup_logging_writes_json_file(self, tmp_path):
        """File handler writes one JSON object per line"""
        root = setup_logging(level="INFO", log_dir=str(tmp_path), json_format=True, log_file="run.log")
        try:
            logging.getLogger("posekit.test").info("written")
            for handler in root.handlers:
                handler.flush()
            lines = (tmp_path / "run.log").read_text(encoding="utf-8").splitlines()
            assert json.loads(lines[-1])["message"] == "written"
        finally:
            for handler in list(root.handlers):
                handler.close()
                root.removeHandler(handler)
