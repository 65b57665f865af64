"""Run configuration shared by every CLI command, stored as YAML."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .meter import DEFAULT_LAMBDAS, DEFAULT_NPOINTS, DEFAULT_SIGMA, DEFAULT_SPACING

SCENARIO_TOTALS = {"two-body": 1105, "three-body": 1152}
DEFAULT_DELAYS = tuple(float(v) for v in np.round(np.linspace(-5.0, 5.0, 101), 12))


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    pre: str = "+++"
    post: str = "RRR"
    lambdas: tuple = DEFAULT_LAMBDAS
    npoints: int = DEFAULT_NPOINTS
    spacing: float = DEFAULT_SPACING
    sigma: float = DEFAULT_SIGMA
    scenario: str = "two-body"
    visibility: float = 1.0
    first_visibility: float = 1.0
    phase: float = 0.0
    fidelity: float = 1.0
    total: Optional[int] = None
    basis: str = "RL"
    target: str = "RRR"
    delays: tuple = DEFAULT_DELAYS
    coherence_time: float = 1.0
    baseline: float = 1.0
    seed: int = 0
    out: Optional[str] = None
    format: str = "csv"
    drop_ghz_term: bool = False

    def __post_init__(self):
        self.lambdas = tuple(float(v) for v in self.lambdas)
        self.delays = tuple(float(v) for v in self.delays)
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.scenario not in SCENARIO_TOTALS:
            raise ConfigError(f"scenario must be one of {sorted(SCENARIO_TOTALS)}")
        if self.seed is None:
            self.seed = 0

    @property
    def event_total(self) -> int:
        return SCENARIO_TOTALS[self.scenario] if self.total is None else int(self.total)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["lambdas"] = list(self.lambdas)
        d["delays"] = list(self.delays)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def dumps(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "RunConfig":
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"unreadable config: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a mapping")
        return cls.from_dict(data)


def load_config(path, overrides: Optional[dict] = None) -> RunConfig:
    """Defaults, then the file at ``path`` (if any), then ``overrides``."""
    data = {}
    if path is not None:
        data = RunConfig.loads(Path(path).read_text(encoding="utf-8")).to_dict()
    data.update(overrides or {})
    return RunConfig.from_dict(data)


def save_config(cfg: RunConfig, path) -> None:
    Path(path).write_text(cfg.dumps(), encoding="utf-8")
