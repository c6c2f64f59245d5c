"""Loading and validating experiment configuration files."""
from __future__ import annotations

import copy
import json
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import jsonschema
import yaml

from .errors import InvalidArgumentError


def _data_text(name: str) -> str:
    return resources.files("owcrelay").joinpath("data", name).read_text(encoding="utf-8")


def default_config() -> dict[str, Any]:
    return yaml.safe_load(_data_text("default.yaml"))


def config_schema() -> dict[str, Any]:
    return json.loads(_data_text("config.schema.json"))


def deep_merge(base: dict[str, Any], override: Mapping[str, Any]) -> dict[str, Any]:
    """Return ``base`` updated recursively with ``override`` (inputs untouched)."""
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def validate(cfg: Mapping[str, Any]) -> None:
    try:
        jsonschema.validate(cfg, config_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InvalidArgumentError(f"invalid config at {where}: {exc.message}") from None


def load_config(path: str | Path | None = None, overrides: Mapping[str, Any] | None = None) -> dict[str, Any]:
    """Defaults, deep-merged with the YAML file at ``path`` and then ``overrides``."""
    cfg = default_config()
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise InvalidArgumentError(f"cannot read config {path}: {exc}") from None
        try:
            user = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise InvalidArgumentError(f"cannot parse config {path}: {exc}") from None
        if not isinstance(user, dict):
            raise InvalidArgumentError(f"config {path} must hold a mapping at top level")
        validate(user)
        cfg = deep_merge(cfg, user)
    if overrides:
        cfg = deep_merge(cfg, overrides)
    validate(cfg)
    return cfg
