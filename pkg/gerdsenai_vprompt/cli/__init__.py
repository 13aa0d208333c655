"""
Command-line interface (``vprompt``).
"""

from gerdsenai_vprompt.cli.config import CliConfig, load_config, setup_logging
from gerdsenai_vprompt.cli.main import build_parser, main

__all__ = ["CliConfig", "build_parser", "load_config", "main", "setup_logging"]
