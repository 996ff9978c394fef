"""Engine configuration: decoding defaults, backend URLs, data file paths."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .plotgen import RescoreConfig


@dataclass
class EngineConfig:
    num_candidates: int = 10
    top_k: int = 4
    max_new_tokens: int = 200
    temperature: float = 1.0
    backend_urls: dict[str, str | None] = field(default_factory=dict)
    auth_token: str | None = None
    banlist_path: str | None = None      # None selects the packaged default
    music_map_path: str | None = None    # None selects the packaged default
    session_dir: str = "sessions"
    index_path: str | None = None

    def rescore_config(self) -> RescoreConfig:
        return RescoreConfig(
            num_candidates=self.num_candidates,
            top_k=self.top_k,
            max_new_tokens=self.max_new_tokens,
            temperature=self.temperature,
        )


def load_config(path: str | Path | None) -> EngineConfig:
    """Read a JSON config file; missing keys keep their defaults."""
    if path is None:
        return EngineConfig()
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    cfg = EngineConfig()
    for key in (
        "num_candidates", "top_k", "max_new_tokens", "temperature",
        "backend_urls", "auth_token", "banlist_path", "music_map_path",
        "session_dir", "index_path",
    ):
        if key in doc:
            setattr(cfg, key, doc[key])
    return cfg
