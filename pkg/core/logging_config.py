"""
Logging setup for posekit

Console records go to stderr, since several commands stream CSV, tokens or
FSW text on stdout. A file handler is added only when a log directory is
given, optionally writing one JSON object per line.
"""

import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Literal, Optional

LevelName = Literal["DEBUG", "INFO", "WARNING", "ERROR"]

CONSOLE_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
CONSOLE_DATEFMT = "%H:%M:%S"

# Record attributes copied into JSON output when a caller or LogContext set them
EXTRA_FIELDS = ("operation", "case", "frames", "component", "duration_ms")

# Imaging libraries that chatter at INFO while render writes PNG files
NOISY_LOGGERS = ("PIL", "imageio", "matplotlib")


class JSONFormatter(logging.Formatter):
    """One JSON object per record, UTC timestamp with a Z suffix"""

    def format(self, record: logging.LogRecord) -> str:
        stamp = datetime.fromtimestamp(record.created, tz=timezone.utc)
        payload: Dict[str, Any] = {
            "timestamp": stamp.isoformat().replace("+00:00", "Z"),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
        }
        payload.update({name: getattr(record, name) for name in EXTRA_FIELDS if hasattr(record, name)})
        if record.exc_info:
            payload["exception"] = self.formatException(record.exc_info)
        return json.dumps(payload, ensure_ascii=False, default=str)


class ColoredFormatter(logging.Formatter):
    """Level name wrapped in an ANSI color"""

    LEVEL_COLORS = {
        logging.DEBUG: "\033[36m",
        logging.INFO: "\033[32m",
        logging.WARNING: "\033[33m",
        logging.ERROR: "\033[31m",
        logging.CRITICAL: "\033[35m",
    }
    RESET = "\033[0m"

    def format(self, record: logging.LogRecord) -> str:
        # colored copy only; the same record also reaches the file handler
        colored = logging.makeLogRecord(record.__dict__)
        color = self.LEVEL_COLORS.get(record.levelno, "")
        colored.levelname = f"{color}{record.levelname}{self.RESET}"
        return super().format(colored)


def _console_handler(level: int) -> logging.Handler:
    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(level)
    formatter_cls = ColoredFormatter if sys.stderr.isatty() else logging.Formatter
    handler.setFormatter(formatter_cls(CONSOLE_FORMAT, datefmt=CONSOLE_DATEFMT))
    return handler


def _file_handler(log_dir: str, log_file: Optional[str], level: int, json_format: bool) -> logging.Handler:
    directory = Path(log_dir)
    directory.mkdir(parents=True, exist_ok=True)
    name = log_file or f"posekit_{datetime.now():%Y%m%d_%H%M%S}.log"
    handler = logging.FileHandler(directory / name, encoding="utf-8")
    handler.setLevel(level)
    handler.setFormatter(JSONFormatter() if json_format else logging.Formatter(CONSOLE_FORMAT))
    return handler


def setup_logging(
    level: LevelName = "WARNING",
    log_dir: Optional[str] = None,
    json_format: bool = False,
    log_file: Optional[str] = None,
    file_level: Optional[LevelName] = None,
    quiet: bool = True,
) -> logging.Logger:
    """Configure the root logger and return it

    Existing root handlers are replaced, so calling this twice does not
    duplicate output.

    Args:
        level: Console log level
        log_dir: Directory for log files; no file handler when None
        json_format: Write file records with JSONFormatter
        log_file: File name inside log_dir (posekit_<timestamp>.log if None)
        file_level: File log level, same as level when None
        quiet: Raise imaging libraries to WARNING
    """
    console_level = logging.getLevelName(level)
    file_lvl = logging.getLevelName(file_level or level)

    root = logging.getLogger()
    root.handlers.clear()
    root.addHandler(_console_handler(console_level))
    if log_dir:
        root.addHandler(_file_handler(log_dir, log_file, file_lvl, json_format))
    root.setLevel(min(console_level, file_lvl) if log_dir else console_level)

    if quiet:
        for name in NOISY_LOGGERS:
            logging.getLogger(name).setLevel(logging.WARNING)

    return root


class LogContext:
    """Attach fields such as operation or frames to every record made inside a block

        with LogContext(logger, operation="stitch", frames=120):
            logger.info("joined")
    """

    def __init__(self, logger: logging.Logger, **fields: Any):
        self.logger = logger
        self.fields = fields
        self._previous: Optional[Any] = None

    def __enter__(self) -> "LogContext":
        previous = self._previous = logging.getLogRecordFactory()
        fields = self.fields

        def factory(*args: Any, **kwargs: Any) -> logging.LogRecord:
            record = previous(*args, **kwargs)
            record.__dict__.update(fields)
            return record

        logging.setLogRecordFactory(factory)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> bool:
        logging.setLogRecordFactory(self._previous)
        return False
