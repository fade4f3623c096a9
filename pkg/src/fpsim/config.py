"""YAML run configuration: parsing with line-anchored errors, and writing.

A minimal file needs only ``topic``::

    topic: a vaccine contains tracking microchips
    n_agents: 30
    horizon: 15
    contacts_per_day: [2, 5]
    trait_profile: credulous        # or a mapping of dimension -> rule
    intervention: every_k(1,3)
    seed: 7
    ablation: {disable_short_term: true}

API keys are never read from or written to config files; the LLM backend
takes its key from the ``FPS_API_KEY`` environment variable.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path
from typing import Any

import yaml

from .backends.base import AblationFlags
from .backends.llm import API_KEY_ENV, LlmBackendConfig
from .backends.mock import MockBackendConfig
from .exceptions import ConfigError
from .persona import SusceptibilityWeights, TraitProfile
from .simulator import InterventionSchedule, SimulationConfig

_INT = "int"
_BOOL = "bool"
_STR = "str"
_NUM = "number"

TOP_LEVEL = {
    "topic": _STR,
    "n_agents": _INT,
    "horizon": _INT,
    "contacts_per_day": "pair",
    "n_initially_infected": _INT,
    "trait_profile": "profile",
    "intervention": _STR,
    "backend": _STR,
    "seed": _INT,
    "symmetric_contacts": _BOOL,
    "long_term_char_cap": _INT,
    "name_pool": _STR,
    "ablation": "section",
    "mock": "section",
    "llm": "section",
}

SECTIONS = {
    "ablation": {"disable_long_term": _BOOL, "disable_short_term": _BOOL, "disable_reasoning": _BOOL},
    "mock": {
        "official_weight": _NUM,
        "recall_days": _INT,
        "short_term_persuades": _BOOL,
        "seed": _INT,
        "susceptibility": "section",
    },
    "llm": {
        "endpoint_url": _STR,
        "model_name": _STR,
        "temperature": _NUM,
        "max_retries": _INT,
        "timeout": _NUM,
        "max_concurrent_requests": _INT,
        "backoff": _NUM,
    },
    "susceptibility": {
        f.name: _NUM for f in dataclasses.fields(SusceptibilityWeights)
    },
}


def _line_map(node, path=(), out=None) -> dict[tuple, int]:
    """1-based source line of every mapping key and sequence item."""
    out = {} if out is None else out
    out.setdefault(path, node.start_mark.line + 1)
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            key = key_node.value
            out[path + (key,)] = key_node.start_mark.line + 1
            _line_map(value_node, path + (key,), out)
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            _line_map(item, path + (i,), out)
    return out


class _Reader:
    def __init__(self, lines: dict[tuple, int], source: str | None):
        self.lines = lines
        self.source = source

    def error(self, path: tuple, message: str) -> ConfigError:
        line = None
        for k in range(len(path), -1, -1):
            if path[:k] in self.lines:
                line = self.lines[path[:k]]
                break
        where = ".".join(str(p) for p in path)
        return ConfigError(f"{where}: {message}" if where else message, line=line, path=self.source)

    def typed(self, path: tuple, value: Any, kind: str) -> Any:
        if kind == _INT:
            if isinstance(value, bool) or not isinstance(value, int):
                raise self.error(path, f"expected an integer, got {value!r}")
        elif kind == _NUM:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise self.error(path, f"expected a number, got {value!r}")
            value = float(value)
        elif kind == _BOOL:
            if not isinstance(value, bool):
                raise self.error(path, f"expected true or false, got {value!r}")
        elif kind == _STR:
            if not isinstance(value, str):
                raise self.error(path, f"expected a string, got {value!r}")
        return value

    def section(self, path: tuple, value: Any, schema: dict[str, str]) -> dict:
        if value is None:
            return {}
        if not isinstance(value, dict):
            raise self.error(path, "expected a mapping")
        out = {}
        for key, item in value.items():
            if key == "api_key":
                raise self.error(
                    path + (key,), f"API keys are not accepted in config files; set {API_KEY_ENV}"
                )
            if key not in schema:
                raise self.error(path + (key,), f"unknown key; expected one of {sorted(schema)}")
            kind = schema[key]
            if kind == "section":
                out[key] = self.section(path + (key,), item, SECTIONS[key])
            else:
                out[key] = self.typed(path + (key,), item, kind)
        return out


def parse_config_text(text: str, source: str | None = None, base_dir: Path | None = None) -> SimulationConfig:
    """Build a validated :class:`SimulationConfig` from YAML text."""
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"invalid YAML: {getattr(exc, 'problem', exc)}", line=line, path=source) from None
    reader = _Reader(_line_map(root) if root is not None else {}, source)
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise reader.error((), "config must be a mapping")

    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        if key not in TOP_LEVEL:
            raise reader.error((key,), f"unknown key; expected one of {sorted(TOP_LEVEL)}")
        kind = TOP_LEVEL[key]
        p = (key,)
        if kind == "pair":
            if not isinstance(value, list) or len(value) != 2:
                raise reader.error(p, "expected a two-element list [c_min, c_max]")
            kwargs[key] = tuple(reader.typed(p + (i,), v, _INT) for i, v in enumerate(value))
        elif kind == "profile":
            kwargs[key] = _profile(reader, p, value)
        elif kind == "section":
            kwargs[key] = reader.section(p, value, SECTIONS[key])
        else:
            kwargs[key] = reader.typed(p, value, kind)

    if "topic" not in kwargs:
        raise reader.error((), "missing required key 'topic'")

    def check(key: str, ok: bool, message: str) -> None:
        if not ok:
            raise reader.error((key,), message)

    if "intervention" in kwargs:
        try:
            kwargs["intervention"] = InterventionSchedule.parse(kwargs["intervention"])
        except ConfigError as exc:
            raise reader.error(("intervention",), str(exc)) from None
    if "seed" in kwargs:
        kwargs["run_seed"] = kwargs.pop("seed")
    if "name_pool" in kwargs and base_dir is not None:
        pool = Path(kwargs["name_pool"])
        kwargs["name_pool"] = str(pool if pool.is_absolute() else (base_dir / pool).resolve())

    ablation = kwargs.pop("ablation", {})
    mock = kwargs.pop("mock", {})
    llm = kwargs.pop("llm", {})
    try:
        kwargs["ablation"] = AblationFlags(**ablation)
        if "susceptibility" in mock:
            mock["susceptibility"] = SusceptibilityWeights(**mock["susceptibility"])
        kwargs["mock"] = MockBackendConfig(**mock)
    except ValueError as exc:
        raise reader.error(("mock",), str(exc)) from None
    try:
        kwargs["llm"] = LlmBackendConfig(**llm)
    except ValueError as exc:
        raise reader.error(("llm",), str(exc)) from None

    cfg = SimulationConfig(**kwargs)
    n = cfg.n_agents
    check("topic", cfg.topic.strip() != "", "topic must be a non-empty string")
    check("n_agents", n >= 2, f"n_agents must be >= 2, got {n}")
    check("horizon", cfg.horizon >= 1, f"horizon must be >= 1, got {cfg.horizon}")
    c_min, c_max = cfg.contacts_per_day
    check("contacts_per_day", 1 <= c_min <= c_max, f"need 1 <= c_min <= c_max, got {[c_min, c_max]}")
    check("contacts_per_day", c_max <= n - 1, f"c_max={c_max} out of range: at most n_agents - 1 = {n - 1}")
    check(
        "n_initially_infected",
        0 <= cfg.n_initially_infected <= n,
        f"must be in [0, {n}], got {cfg.n_initially_infected}",
    )
    check("backend", cfg.backend in ("mock", "llm"), f"must be 'mock' or 'llm', got {cfg.backend!r}")
    check("long_term_char_cap", cfg.long_term_char_cap >= 1, "must be positive")
    check("seed", 0 <= cfg.run_seed < 2**64, "must be an unsigned 64-bit integer")
    try:
        cfg.intervention.validate(cfg.horizon)
    except ConfigError as exc:
        raise reader.error(("intervention",), str(exc)) from None
    try:
        return cfg.validate()
    except ConfigError as exc:
        raise ConfigError(str(exc), path=source) from None


def _profile(reader: _Reader, path: tuple, value: Any) -> TraitProfile:
    try:
        if isinstance(value, str):
            return TraitProfile.from_name(value)
        if isinstance(value, dict):
            return TraitProfile.from_mapping(value)
    except ConfigError as exc:
        raise reader.error(path, str(exc)) from None
    raise reader.error(path, "expected a profile name or a mapping of trait -> rule")


def parse_config(path: str | Path) -> SimulationConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", path=str(path)) from None
    return parse_config_text(text, source=str(path), base_dir=path.parent)


def config_to_dict(cfg: SimulationConfig) -> dict:
    """Plain-data form of a config; the API key is never included."""
    profile = cfg.trait_profile
    llm = dataclasses.asdict(cfg.llm)
    llm.pop("api_key", None)
    mock = dataclasses.asdict(cfg.mock)
    out = {
        "topic": cfg.topic,
        "n_agents": cfg.n_agents,
        "horizon": cfg.horizon,
        "contacts_per_day": list(cfg.contacts_per_day),
        "n_initially_infected": cfg.n_initially_infected,
        "trait_profile": profile.name or profile.as_dict(),
        "intervention": str(cfg.intervention),
        "backend": cfg.backend,
        "seed": cfg.run_seed,
        "symmetric_contacts": cfg.symmetric_contacts,
        "long_term_char_cap": cfg.long_term_char_cap,
        "ablation": cfg.ablation.as_dict(),
        "mock": mock,
        "llm": llm,
    }
    if cfg.name_pool is not None:
        out["name_pool"] = cfg.name_pool
    return out


def dump_config(cfg: SimulationConfig) -> str:
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False, allow_unicode=True)


def write_config(cfg: SimulationConfig, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(dump_config(cfg), encoding="utf-8")
    return path

