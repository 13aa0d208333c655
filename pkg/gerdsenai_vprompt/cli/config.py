"""
CLI configuration discovery and resolution.

Sources, later ones winning:
- built-in defaults
- the first existing JSON file of CONFIG_PATHS, or --config PATH
- ANNOTATE_ENDPOINT / ANNOTATE_TOKEN environment variables
- command-line flags
"""

import json
import logging
import os
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

from gerdsenai_vprompt.errors import InvalidArgumentError, ParseError, UsageError
from gerdsenai_vprompt.workers import default_threads

logger = logging.getLogger(__name__)

ENV_ENDPOINT = "ANNOTATE_ENDPOINT"
ENV_TOKEN = "ANNOTATE_TOKEN"

LOG_FORMAT = "[%(asctime)s] %(levelname)s %(name)s: %(message)s"
LOG_DATEFMT = "%H:%M:%S"


def get_config_paths() -> List[Path]:
    """Candidate config files, in lookup order (may not exist)."""
    home = Path.home()
    return [
        home / ".config" / "gerdsenai" / "vprompt.json",
        home / ".vprompt" / "config.json",
        Path.cwd() / "vprompt.json",
    ]


@dataclass(frozen=True)
class CliConfig:
    seed: Optional[int] = None
    threads: int = field(default_factory=default_threads)
    strict: bool = False
    alpha: float = 0.1
    patch_px: int = 32
    k: int = 4
    tau: float = 0.5
    coords_in_text: bool = False
    provider: str = "mock"
    template: str = "brief"
    endpoint: Optional[str] = None
    token: Optional[str] = None
    timeout_s: float = 30.0
    retries: int = 3
    source: Optional[str] = None

    def __post_init__(self):
        if self.threads < 1:
            raise InvalidArgumentError(f"threads must be >= 1, got {self.threads}")
        if self.seed is not None and self.seed < 0:
            raise InvalidArgumentError(f"seed must be non-negative, got {self.seed}")
        if self.retries < 1:
            raise InvalidArgumentError(f"retries must be >= 1, got {self.retries}")
        if not 0.0 < self.tau < 1.0:
            raise InvalidArgumentError(f"tau must be in (0, 1), got {self.tau}")
        if self.alpha < 0:
            raise InvalidArgumentError(f"alpha must be >= 0, got {self.alpha}")

    @property
    def run_seed(self) -> int:
        return 0 if self.seed is None else self.seed


_KEYS = {f.name for f in fields(CliConfig)} - {"source"}


def _read_config_file(path: Path) -> Dict[str, Any]:
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    return data


def _apply(cfg: CliConfig, values: Mapping[str, Any], origin: str) -> CliConfig:
    known = {}
    for key, value in values.items():
        if key not in _KEYS:
            logger.warning("%s: ignoring unknown config key %r", origin, key)
            continue
        known[key] = value
    return replace(cfg, **known)


def load_config(explicit: Optional[str] = None, env: Optional[Mapping[str, str]] = None) -> CliConfig:
    """Defaults, then one config file, then the environment."""
    cfg = CliConfig()
    if explicit:
        path = Path(explicit)
        if not path.is_file():
            raise UsageError(f"config file not found: {path}")
        try:
            cfg = replace(_apply(cfg, _read_config_file(path), str(path)), source=str(path))
        except (json.JSONDecodeError, ValueError) as e:
            raise ParseError(str(e), path=str(path)) from e
    else:
        for path in get_config_paths():
            if not path.is_file():
                continue
            try:
                cfg = replace(_apply(cfg, _read_config_file(path), str(path)), source=str(path))
                break
            except (json.JSONDecodeError, OSError, ValueError) as e:
                # Skip invalid configs
                logger.warning("Failed to parse %s: %s", path, e)

    env = os.environ if env is None else env
    if env.get(ENV_ENDPOINT):
        cfg = replace(cfg, endpoint=env[ENV_ENDPOINT])
    if env.get(ENV_TOKEN):
        cfg = replace(cfg, token=env[ENV_TOKEN])
    return cfg


def apply_flags(cfg: CliConfig, flags: Mapping[str, Any]) -> CliConfig:
    """Overlay flags that were actually given (not None)."""
    given = {k: v for k, v in flags.items() if k in _KEYS and v is not None}
    return replace(cfg, **given)


def setup_logging(verbosity: int = 0) -> None:
    """Route package logs to stderr; stdout stays free for JSON."""
    if verbosity < 0:
        level = logging.ERROR
    elif verbosity == 0:
        level = logging.INFO
    else:
        level = logging.DEBUG
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "_vprompt", False):
            root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT, LOG_DATEFMT))
    handler._vprompt = True
    root.addHandler(handler)
    root.setLevel(level)
