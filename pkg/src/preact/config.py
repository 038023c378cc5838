"""YAML run configuration: provider table and defaults.

Example::

    providers:
      gpt4:
        kind: http
        endpoint: https://api.openai.com/v1/chat/completions
        model: gpt-4-turbo
        auth_env: OPENAI_API_KEY
      mock:
        kind: scripted
        fixture: fixtures/agent.json
    defaults:
      mode: preact
      max_iterations: 8
      temperature: 0
      n_runs: 50
    similarity:
      endpoint: https://api.openai.com/v1/embeddings
      model: text-embedding-3-small
      auth_env: OPENAI_API_KEY

API keys are only ever read from the environment variable named by
``auth_env``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .orchestrator import DEFAULT_MAX_ITERATIONS, HttpLlm, LlmPort, ScriptedLlm

_SECRET_KEYS = {"api_key", "apikey", "key", "token", "auth", "authorization", "password", "secret"}
_PROVIDER_KEYS = {"kind", "endpoint", "model", "auth_env", "fixture"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ProviderSpec:
    kind: str
    endpoint: str | None = None
    model: str | None = None
    auth_env: str | None = None
    fixture: Path | None = None

    def build(self) -> LlmPort:
        if self.kind == "scripted":
            return ScriptedLlm.from_file(self.fixture)
        return HttpLlm(self.endpoint, model=self.model, auth_env=self.auth_env)


@dataclass
class Config:
    providers: dict[str, ProviderSpec] = field(default_factory=dict)
    mode: str = "preact"
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    temperature: float = 0.0
    n_runs: int = 50
    similarity: dict[str, Any] | None = None

    def provider(self, ref: str) -> LlmPort:
        """Resolve a provider id, or the inline form ``scripted:<fixture path>``."""
        if ref.startswith("scripted:"):
            path = Path(ref.split(":", 1)[1])
            if not path.exists():
                raise ConfigError(f"scripted fixture {path} not found")
            return ScriptedLlm.from_file(path)
        if ref not in self.providers:
            raise ConfigError(f"unknown provider {ref!r}")
        return self.providers[ref].build()


def _provider(name: str, raw: Any, base: Path) -> ProviderSpec:
    if not isinstance(raw, dict):
        raise ConfigError(f"provider {name!r} must be a mapping")
    secrets = sorted(k for k in raw if k.lower() in _SECRET_KEYS)
    if secrets:
        raise ConfigError(f"provider {name!r}: credentials must come from auth_env, not {', '.join(secrets)}")
    extra = sorted(set(raw) - _PROVIDER_KEYS)
    if extra:
        raise ConfigError(f"provider {name!r}: unknown keys {', '.join(extra)}")
    kind = raw.get("kind")
    if kind == "scripted":
        if not raw.get("fixture"):
            raise ConfigError(f"scripted provider {name!r} needs a fixture")
        fixture = Path(raw["fixture"])
        return ProviderSpec("scripted", fixture=fixture if fixture.is_absolute() else base / fixture)
    if kind == "http":
        if not raw.get("endpoint"):
            raise ConfigError(f"http provider {name!r} needs an endpoint")
        return ProviderSpec("http", endpoint=raw["endpoint"], model=raw.get("model"), auth_env=raw.get("auth_env"))
    raise ConfigError(f"provider {name!r} has unknown kind {kind!r}")


def load_config(path: str | Path | None) -> Config:
    if path is None:
        return Config()
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    base = path.parent
    providers = {name: _provider(name, raw, base) for name, raw in (data.get("providers") or {}).items()}
    defaults = data.get("defaults") or {}
    cfg = Config(
        providers=providers,
        mode=defaults.get("mode", "preact"),
        max_iterations=int(defaults.get("max_iterations", DEFAULT_MAX_ITERATIONS)),
        temperature=float(defaults.get("temperature", 0.0)),
        n_runs=int(defaults.get("n_runs", 50)),
        similarity=data.get("similarity"),
    )
    if cfg.mode not in ("react", "preact"):
        raise ConfigError(f"unknown default mode {cfg.mode!r}")
    return cfg
