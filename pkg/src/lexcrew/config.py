"""Application configuration: JSON file + environment + CLI flags.

Precedence is CLI flags > environment variables > config file. Tokens
for remote backends only ever come from the environment
(LEXCREW_LLM_TOKEN / LEXCREW_EMBED_TOKEN).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .embed import EmbedderConfig, HttpEmbedder, StubEmbedder
from .errors import ConfigError
from .llm import HttpChatBackend, LlmConfig, ScriptedBackend
from .prompts import PromptLedger, load_ledger

DEFAULT_CONFIG_FILE = "lexcrew.json"
CONFIG_PATH_ENV = "LEXCREW_CONFIG"


@dataclass
class AppConfig:
    embedder: dict = field(default_factory=lambda: {"kind": "stub", "dim": 64})
    models: dict = field(default_factory=dict)
    default_model: str | None = None
    judge_model: str | None = None
    retrieval: dict = field(default_factory=lambda: {"k": 20, "separator": "\n\n"})
    agents: dict = field(default_factory=lambda: {"distill": True})
    correctness: dict = field(default_factory=lambda: {"w_factual": 0.75, "w_semantic": 0.25})
    server: dict = field(default_factory=lambda: {"port": 8080, "cors_origins": ["*"], "static_dir": None})
    prompts: dict = field(default_factory=lambda: {"agents": None, "judge": None})
    base_dir: Path = field(default_factory=Path)

    @classmethod
    def from_dict(cls, raw: dict, base_dir: Path | None = None) -> "AppConfig":
        cfg = cls(base_dir=base_dir or Path.cwd())
        for key in ("embedder", "models", "default_model", "judge_model", "retrieval",
                    "agents", "correctness", "server", "prompts"):
            if key in raw:
                current = getattr(cfg, key)
                if isinstance(current, dict) and isinstance(raw[key], dict):
                    current.update(raw[key])
                else:
                    setattr(cfg, key, raw[key])
        unknown = set(raw) - {"embedder", "models", "default_model", "judge_model", "retrieval",
                              "agents", "correctness", "server", "prompts"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cfg

    @classmethod
    def load(cls, path: str | Path | None = None) -> "AppConfig":
        """Load from the given path, $LEXCREW_CONFIG, ./lexcrew.json, or defaults."""
        if path is None:
            path = os.environ.get(CONFIG_PATH_ENV)
        if path is None and Path(DEFAULT_CONFIG_FILE).exists():
            path = DEFAULT_CONFIG_FILE
        if path is None:
            return cls()
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load config {path}: {exc}") from exc
        return cls.from_dict(raw, base_dir=path.parent)

    # factories -----------------------------------------------------------

    def build_embedder(self):
        kind = self.embedder.get("kind", "stub")
        if kind == "stub":
            return StubEmbedder(dim=int(self.embedder.get("dim", 64)))
        if kind == "http":
            keys = ("endpoint_url", "model_id", "query_prefix", "passage_prefix", "timeout_ms", "max_batch")
            kwargs = {k: self.embedder[k] for k in keys if k in self.embedder}
            return HttpEmbedder(EmbedderConfig(**kwargs))
        raise ConfigError(f"unknown embedder kind {kind!r}")

    def model_ids(self) -> list[str]:
        return sorted(self.models) if self.models else ["scripted"]

    def resolve_model(self, model_id: str | None) -> str:
        if model_id is None:
            model_id = self.default_model or (self.model_ids()[0])
        if self.models and model_id not in self.models:
            raise ConfigError(f"unknown model {model_id!r}; configured: {self.model_ids()}")
        return model_id

    def build_backend(self, model_id: str | None = None):
        """Returns (backend, LlmConfig) for the resolved model."""
        model_id = self.resolve_model(model_id)
        entry = self.models.get(model_id, {"kind": "scripted", "entries": [], "strict": False})
        kind = entry.get("kind", "http")
        if kind == "scripted":
            entries = entry.get("entries")
            if entries is None and entry.get("script"):
                script_path = self.base_dir / entry["script"]
                try:
                    entries = json.loads(script_path.read_text(encoding="utf-8"))
                except (OSError, json.JSONDecodeError) as exc:
                    raise ConfigError(f"cannot load script {script_path}: {exc}") from exc
            script = [(_matcher_from(e), e.get("reply", "")) for e in (entries or [])]
            backend = ScriptedBackend(script, strict=bool(entry.get("strict", False)),
                                      default_reply=entry.get("default_reply", ""))
            return backend, LlmConfig(model_id=model_id)
        if kind == "http":
            cfg = LlmConfig(
                endpoint_url=entry["endpoint_url"],
                model_id=entry.get("model_id", model_id),
                temperature=float(entry.get("temperature", 0.0)),
                max_tokens=int(entry.get("max_tokens", 1024)),
                timeout_ms=int(entry.get("timeout_ms", 60_000)),
            )
            return HttpChatBackend(), cfg
        raise ConfigError(f"unknown model kind {kind!r} for {model_id!r}")

    def load_prompts(self, name: str) -> PromptLedger:
        override = self.prompts.get(name)
        if override:
            return load_ledger(name, override_path=self.base_dir / override)
        return load_ledger(name)


def _matcher_from(entry: dict):
    """Script entries match on 'contains' (one substring) or 'contains_all'."""
    if "contains_all" in entry:
        needles = [str(s) for s in entry["contains_all"]]
        return lambda text: all(n in text for n in needles)
    return entry.get("contains", "")
