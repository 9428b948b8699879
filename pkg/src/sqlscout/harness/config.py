"""Run configuration file: INI sections mirroring the engine and endpoint settings.

Example:

    [search]
    n_rollout = 24
    t_expansion = 0.8

    [endpoint]
    base_url = http://localhost:8000/v1
    chat_model = qwen2.5-coder-7b-instruct
    cache_dir = .sqlscout-cache

Unset keys keep their defaults; environment variables fill endpoint gaps.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import fields
from pathlib import Path

from ..core.types import SearchConfig
from ..errors import IngestionError
from ..llm_client import EndpointConfig

_SEARCH_SECTION = "search"
_ENDPOINT_SECTION = "endpoint"


def load_config(path: str | Path | None) -> tuple[SearchConfig, EndpointConfig]:
    """Parse the config file; a None path yields pure defaults plus env."""
    endpoint = EndpointConfig.from_env()
    if path is None:
        return SearchConfig(), endpoint
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    parser.read(path, encoding="utf-8")

    search_kwargs = {}
    if parser.has_section(_SEARCH_SECTION):
        section = parser[_SEARCH_SECTION]
        for f in fields(SearchConfig):
            if f.name not in section:
                continue
            raw = section[f.name]
            if f.type in ("int", int):
                search_kwargs[f.name] = int(raw)
            elif f.type in ("float", float):
                search_kwargs[f.name] = _parse_float(raw)
            elif f.type in ("bool", bool):
                search_kwargs[f.name] = section.getboolean(f.name)
            else:
                search_kwargs[f.name] = raw
    cfg = SearchConfig(**search_kwargs)

    if parser.has_section(_ENDPOINT_SECTION):
        section = parser[_ENDPOINT_SECTION]
        for name in ("base_url", "api_key", "chat_model", "embed_model", "cache_dir"):
            if section.get(name):
                setattr(endpoint, name, section[name])
    return cfg, endpoint


def _parse_float(raw: str) -> float:
    # allow sqrt(2)-style spelling for the UCT constant
    text = raw.strip().lower()
    if text in ("sqrt2", "sqrt(2)"):
        return math.sqrt(2)
    return float(text)
