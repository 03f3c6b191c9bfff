"""Pipeline and service configuration, loaded from TOML.

Relative paths in a config file are resolved against the file's directory.
Anything not given falls back to the packaged template, context ontology and
shapes. API keys are never read from the file, only from the environment
variable it names.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .llm import ProviderConfig, ProviderKind
from .prompts import PromptTemplate, load_template
from .rdf import Graph, TurtleSyntaxError, parse_turtle
from .shacl import ShapeDefinitionError, ShapesGraph, parse_shapes

DATA_DIR = Path(str(resources.files("capgen") / "data"))
DEFAULT_TEMPLATE_DIR = DATA_DIR / "template"
DEFAULT_SCHEMA_FILE = DEFAULT_TEMPLATE_DIR / "context.ttl"
DEFAULT_SHAPES_FILE = DATA_DIR / "shapes.ttl"

_SECRET_KEYS = {"api_key", "apikey", "key", "token", "secret", "password"}


def read_turtle_file(path: Path, what: str) -> Graph:
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"{what} not found: {path}") from None
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read {what} {path}: {exc}") from None
    try:
        return parse_turtle(text)
    except TurtleSyntaxError as exc:
        raise ConfigError(f"{what} {path}: {exc.diagnostics[0]}") from None


@dataclass(frozen=True)
class PipelineConfig:
    template_dir: Path = DEFAULT_TEMPLATE_DIR
    shapes_file: Path = DEFAULT_SHAPES_FILE
    schema_file: Path = DEFAULT_SCHEMA_FILE
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    max_repeat_per_step: int = 1
    closure_triple_cap: int = 1_000_000

    def __post_init__(self) -> None:
        for name in ("template_dir", "shapes_file", "schema_file"):
            object.__setattr__(self, name, Path(getattr(self, name)))
        if not isinstance(self.max_repeat_per_step, int) or self.max_repeat_per_step < 0:
            raise ConfigError("max_repeat_per_step must be an integer >= 0")
        if self.closure_triple_cap <= 0:
            raise ConfigError("closure_triple_cap must be positive")

    # loaded lazily, then cached; the dataclass stays logically immutable
    @cached_property
    def template(self) -> PromptTemplate:
        return load_template(self.template_dir)

    @cached_property
    def schema(self) -> Graph:
        return read_turtle_file(self.schema_file, "schema")

    @cached_property
    def shapes(self) -> ShapesGraph:
        doc = read_turtle_file(self.shapes_file, "shapes file")
        try:
            return parse_shapes(doc)
        except ShapeDefinitionError as exc:
            raise ConfigError(f"{self.shapes_file}: {exc}") from None

    def check(self) -> "PipelineConfig":
        """Load every referenced file now, so errors surface before any LLM call."""
        self.template, self.schema, self.shapes
        return self

    def with_overrides(
        self,
        *,
        model: Optional[str] = None,
        max_repeat: Optional[int] = None,
        replay: "Optional[str | Path]" = None,
    ) -> "PipelineConfig":
        provider = self.provider
        if replay is not None:
            provider = replace(provider, kind=ProviderKind.REPLAY, session_path=Path(replay))
        if model is not None:
            provider = replace(provider, model=model)
        changes: dict[str, Any] = {"provider": provider}
        if max_repeat is not None:
            changes["max_repeat_per_step"] = max_repeat
        return replace(self, **changes)


@dataclass(frozen=True)
class ServiceSettings:
    host: str = "127.0.0.1"
    port: int = 8080
    workers: int = 2
    queue_capacity: int = 16
    job_ttl_seconds: float = 3600
    max_repeat_limit: int = 3
    allowed_models: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "allowed_models", tuple(self.allowed_models))
        if self.workers < 1 or self.queue_capacity < 1:
            raise ConfigError("workers and queue_capacity must be >= 1")
        if self.max_repeat_limit < 0:
            raise ConfigError("max_repeat_limit must be >= 0")


def _reject_secrets(table: Mapping[str, Any], where: str) -> None:
    for k in table:
        if k.lower() in _SECRET_KEYS:
            raise ConfigError(
                f"{where}: '{k}' is not allowed; name an environment variable with api_key_env instead"
            )


def _take(table: dict[str, Any], allowed: set[str], where: str) -> dict[str, Any]:
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown key(s): {', '.join(sorted(unknown))}")
    return table


def _provider_from(table: dict[str, Any], base: Path) -> ProviderConfig:
    _reject_secrets(table, "[provider]")
    _take(
        table,
        {
            "kind", "model", "endpoint_url", "api_key_env", "timeout_seconds",
            "max_retries_transport", "max_output_tokens", "session",
        },
        "[provider]",
    )
    args = dict(table)
    if "session" in args:
        args["session_path"] = base / args.pop("session")
    try:
        return ProviderConfig(**args)
    except TypeError as exc:
        raise ConfigError(f"[provider]: {exc}") from None


def load_config(path: "str | Path") -> tuple[PipelineConfig, ServiceSettings]:
    """Read a TOML config file into pipeline and service settings."""
    p = Path(path)
    try:
        data = tomllib.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {p}") from None
    except (OSError, UnicodeDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from None
    return config_from_dict(data, p.parent)


def config_from_dict(data: dict[str, Any], base: Path = Path(".")) -> tuple[PipelineConfig, ServiceSettings]:
    data = dict(data)
    _reject_secrets(data, "config")
    provider_table = data.pop("provider", {})
    service_table = data.pop("service", {})
    _take(
        data,
        {"template_dir", "shapes_file", "schema_file", "max_repeat_per_step", "closure_triple_cap"},
        "config",
    )
    args: dict[str, Any] = {k: base / v if k.endswith(("_dir", "_file")) else v for k, v in data.items()}
    args["provider"] = _provider_from(dict(provider_table), base)
    _take(dict(service_table), {f for f in ServiceSettings.__dataclass_fields__}, "[service]")
    try:
        return PipelineConfig(**args), ServiceSettings(**service_table)
    except TypeError as exc:
        raise ConfigError(f"config: {exc}") from None
