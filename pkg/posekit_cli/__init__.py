"""posekit command-line interface"""

from .display import Colors, Display, DisplayMode
from .main import cli, main, run

__all__ = ["cli", "main", "run", "Display", "DisplayMode", "Colors"]
