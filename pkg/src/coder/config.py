"""Session configuration and the optional coder.toml loader."""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigurationError

DEFAULT_MODEL = "anthropic/claude-sonnet-4"
DEFAULT_MAX_ITERATIONS = 50
DEFAULT_TRUNCATE_LIMIT = 50_000
DEFAULT_EXEC_TIMEOUT = 120.0
DEFAULT_REQUEST_TIMEOUT = 120.0
DEFAULT_LAUNCH_TIMEOUT = 30.0

CONFIG_FILE_NAME = "coder.toml"

# coder.toml key -> SessionConfig field (flat table, all optional)
_TOML_KEYS = {
    "model": "model",
    "base_url": "base_url",
    "truncate_limit": "truncate_limit",
    "request_timeout": "request_timeout",
    "exec_timeout": "exec_timeout",
    "launch_timeout": "launch_timeout",
    "max_iterations": "max_iterations",
    "api_key_env": "api_key_env",
}


@dataclass(frozen=True)
class SessionConfig:
    """Everything one agent session needs, bundled."""

    workdir: str
    task: str | None = None
    task_file: str = "task.md"
    project_prompt: str | None = None
    model: str = DEFAULT_MODEL
    packages: tuple[str, ...] = ()
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    replay_path: str | None = None
    record_path: str | None = None
    truncate_limit: int = DEFAULT_TRUNCATE_LIMIT
    base_url: str = "https://openrouter.ai/api/v1"
    api_key_env: str = "OPENROUTER_API_KEY"
    request_timeout: float = DEFAULT_REQUEST_TIMEOUT
    exec_timeout: float = DEFAULT_EXEC_TIMEOUT
    launch_timeout: float = DEFAULT_LAUNCH_TIMEOUT
    transcript_path: str | None = None
    kernel_cmd: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "packages", tuple(self.packages))
        object.__setattr__(self, "kernel_cmd", tuple(self.kernel_cmd))

    def validate(self) -> "SessionConfig":
        workdir = Path(self.workdir)
        if not workdir.is_dir():
            raise ConfigurationError(f"working directory does not exist: {self.workdir}")
        if self.max_iterations < 1:
            raise ConfigurationError("max_iterations must be >= 1")
        if self.truncate_limit < 1:
            raise ConfigurationError("truncate_limit must be >= 1")
        if not self.model:
            raise ConfigurationError("model id must be non-empty")
        return replace(self, workdir=str(workdir.resolve()))


def load_config_file(path: str | Path) -> dict:
    """Read coder.toml; unknown keys are rejected to catch typos."""
    raw = Path(path).read_bytes()
    try:
        data = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigurationError(f"cannot parse {path}: {exc}") from exc
    unknown = sorted(set(data) - set(_TOML_KEYS))
    if unknown:
        raise ConfigurationError(f"unknown keys in {path}: {', '.join(unknown)}")
    return {_TOML_KEYS[k]: v for k, v in data.items()}


def find_config_file(workdir: str | Path) -> Path | None:
    candidate = Path(workdir) / CONFIG_FILE_NAME
    return candidate if candidate.is_file() else None


def apply_file_defaults(config: SessionConfig, file_values: dict) -> SessionConfig:
    """File values fill in only fields still at their dataclass default;
    explicit flags always win."""
    defaults = {f.name: f.default for f in fields(SessionConfig)}
    updates = {
        key: value
        for key, value in file_values.items()
        if getattr(config, key) == defaults.get(key)
    }
    return replace(config, **updates) if updates else config


def resolve_api_key(config: SessionConfig) -> str | None:
    return os.environ.get(config.api_key_env) or None
