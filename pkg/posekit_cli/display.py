"""
Display - status lines for the CLI

Status goes to stderr; stdout carries command data (CSV, tokens, FSW text,
segments) so commands compose in pipes. Every line is also logged under
posekit.display, which puts it in the log file when one is configured.
"""

import logging
import sys
from enum import Enum
from typing import Dict, NamedTuple, Optional, TextIO


class DisplayMode(str, Enum):
    VERBOSE = "verbose"
    QUIET = "quiet"


class Colors:
    """ANSI escape codes"""
    RESET = "\033[0m"
    BOLD = "\033[1m"
    RED = "\033[31m"
    GREEN = "\033[32m"
    YELLOW = "\033[33m"
    CYAN = "\033[36m"


class _Style(NamedTuple):
    template: str
    color: str
    level: int
    always: bool  # shown in QUIET mode too


_STYLES: Dict[str, _Style] = {
    "header": _Style("== {} ==", Colors.BOLD + Colors.CYAN, logging.INFO, False),
    "info": _Style("  {}", "", logging.INFO, False),
    "success": _Style("  ✓ {}", Colors.GREEN, logging.INFO, False),
    "warning": _Style("  ⚠ {}", Colors.YELLOW, logging.WARNING, True),
    "error": _Style("  ✗ {}", Colors.RED, logging.ERROR, True),
}


class Display:
    """Terminal status output mirrored into logging"""

    def __init__(self, mode: DisplayMode = DisplayMode.VERBOSE, use_colors: bool = True,
                 stream: Optional[TextIO] = None):
        self.mode = mode
        self.stream = stream if stream is not None else sys.stderr
        self.use_colors = use_colors and self.stream.isatty()
        self._logger = logging.getLogger("posekit.display")

    def _show(self, kind: str, text: str) -> None:
        style = _STYLES[kind]
        if style.always or self.mode == DisplayMode.VERBOSE:
            line = style.template.format(text)
            if self.use_colors and style.color:
                line = f"{style.color}{line}{Colors.RESET}"
            print(line, file=self.stream)
        self._logger.log(style.level, text)

    def header(self, text: str) -> None:
        self._show("header", text)

    def info(self, text: str) -> None:
        self._show("info", text)

    def success(self, text: str) -> None:
        self._show("success", text)

    def warning(self, text: str) -> None:
        self._show("warning", text)

    def error(self, text: str) -> None:
        self._show("error", text)
