"""``key = value`` configuration files for the architecture, annealer and timing."""

from __future__ import annotations

import configparser
import typing
from dataclasses import fields
from pathlib import Path
from typing import Any

from .architecture import ArchitectureConfig
from .fidelity import PhysicalParams
from .placement import SAParams
from .timing import TimingModel


class ConfigError(ValueError):
    pass


def read_kv(path: str | Path) -> dict[str, str]:
    """Raw ``key = value`` pairs; ``#`` and ``;`` start comments."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keys are case-sensitive (``T2``)
    try:
        parser.read_string("[config]\n" + Path(path).read_text(encoding="utf-8"))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return dict(parser["config"])


def _coerce(value: str, hint: Any, key: str) -> Any:
    text = value.strip()
    args = typing.get_args(hint)
    if text.lower() in ("none", "") and type(None) in args:
        return None
    base = next((a for a in args if a is not type(None)), hint) if args else hint
    try:
        if base is bool:
            if text.lower() in ("1", "true", "yes", "on"):
                return True
            if text.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if base is int:
            return int(text)
        return float(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot read {value!r} as {base.__name__}") from None


def build(cls, values: dict[str, str]):
    """Instantiate dataclass ``cls`` from string values, rejecting unknown keys."""
    hints = typing.get_type_hints(cls)
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {', '.join(unknown)}")
    kwargs = {k: _coerce(v, hints[k], k) for k, v in values.items()}
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_arch_overrides(path: str | Path) -> dict[str, Any]:
    """Architecture keys from ``path``; sizes left out are chosen per circuit."""
    values = read_kv(path)
    hints = typing.get_type_hints(ArchitectureConfig)
    unknown = sorted(set(values) - set(hints))
    if unknown:
        raise ConfigError(f"unknown ArchitectureConfig keys: {', '.join(unknown)}")
    return {k: _coerce(v, hints[k], k) for k, v in values.items()}


def load_sa_params(path: str | Path) -> SAParams:
    return build(SAParams, read_kv(path))


def load_timing(path: str | Path) -> TimingModel:
    return build(TimingModel, read_kv(path))


def load_physical(path: str | Path) -> PhysicalParams:
    return build(PhysicalParams, read_kv(path))
