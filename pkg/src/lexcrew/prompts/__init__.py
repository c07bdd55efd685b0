"""Loader for the versioned prompt ledgers shipped with the package.

Every LLM-facing instruction lives in a TOML file here (or in an
override file supplied via config), never in code, so the texts are
auditable and swappable without touching the pipelines.
"""

from __future__ import annotations

import sys
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..errors import ConfigError


class PromptLedger:
    def __init__(self, sections: dict[str, dict[str, str]], origin: str):
        self.sections = sections
        self.origin = origin

    def get(self, section: str, key: str) -> str:
        try:
            return self.sections[section][key]
        except KeyError:
            raise ConfigError(f"prompt ledger {self.origin} has no [{section}] {key}") from None

    def format(self, section: str, key: str, **values: str) -> str:
        text = self.get(section, key)
        try:
            return text.format(**values)
        except (KeyError, IndexError) as exc:
            raise ConfigError(f"bad placeholder in [{section}] {key}: {exc}") from exc


def _parse(data: bytes, origin: str) -> PromptLedger:
    try:
        raw = tomllib.loads(data.decode("utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse prompt ledger {origin}: {exc}") from exc
    sections = {}
    for name, table in raw.items():
        if not isinstance(table, dict):
            raise ConfigError(f"prompt ledger {origin}: top-level {name!r} must be a section")
        sections[name] = {k: str(v) for k, v in table.items()}
    return PromptLedger(sections, origin)


def load_ledger(name: str, override_path: str | Path | None = None) -> PromptLedger:
    """Load `agents` or `judge`; an override path replaces the packaged file."""
    if override_path is not None:
        path = Path(override_path)
        return _parse(path.read_bytes(), str(path))
    data = resources.files(__package__).joinpath(f"{name}.toml").read_bytes()
    return _parse(data, f"packaged {name}.toml")
