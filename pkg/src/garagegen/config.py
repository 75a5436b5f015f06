"""Run configuration: INI file sections mirroring each module's config.

Example::

    [static]
    h = 7
    w = 9
    full_rect = true

    [sarsa]
    episodes = 5000

    [dimensions]
    row_widths = 5.0          # one value broadcasts to every row
    col_widths = 5,5,5,5,5,5,5,5,5
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .env import RewardConfig
from .evaluator import EvalCoefficients
from .sarsa import SarsaConfig
from .static_gen import StaticGenConfig

DEFAULT_CELL_METERS = 5.0  # fits one 2.5 m x 5.0 m stall in either orientation

SECTIONS = {
    "static": StaticGenConfig,
    "reward": RewardConfig,
    "sarsa": SarsaConfig,
    "coefficients": EvalCoefficients,
}


@dataclass
class RunConfig:
    static: StaticGenConfig = field(default_factory=StaticGenConfig)
    reward: RewardConfig = field(default_factory=RewardConfig)
    sarsa: SarsaConfig = field(default_factory=SarsaConfig)
    coefficients: EvalCoefficients = field(default_factory=EvalCoefficients)
    row_widths: list[float] | None = None
    col_widths: list[float] | None = None
    output: str | None = None
    verbose: bool = False

    def dimensions(self, h: int, w: int) -> tuple[list[float], list[float]]:
        """Per-row and per-column widths in metres for an ``h x w`` matrix."""
        R = _broadcast(self.row_widths, h, "row_widths")
        C = _broadcast(self.col_widths, w, "col_widths")
        return R, C

    def to_dict(self) -> dict[str, Any]:
        """Generation-relevant settings; output location and verbosity excluded."""
        d = {name: dataclasses.asdict(getattr(self, name)) for name in SECTIONS}
        d["dimensions"] = {"row_widths": self.row_widths, "col_widths": self.col_widths}
        return d

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        for name in SECTIONS:
            cp[name] = {
                k: "" if v is None else str(v).lower() if isinstance(v, bool) else str(v)
                for k, v in dataclasses.asdict(getattr(self, name)).items()
            }
        dims = {}
        if self.row_widths is not None:
            dims["row_widths"] = ",".join(map(str, self.row_widths))
        if self.col_widths is not None:
            dims["col_widths"] = ",".join(map(str, self.col_widths))
        cp["dimensions"] = dims
        cp["run"] = {"verbose": str(self.verbose).lower()}
        if self.output:
            cp["run"]["output"] = self.output
        lines = []
        for section in cp.sections():
            lines.append(f"[{section}]")
            lines += [f"{k} = {v}" for k, v in cp[section].items()]
            lines.append("")
        return "\n".join(lines)


def _broadcast(values: list[float] | None, n: int, name: str) -> list[float]:
    if values is None:
        values = [DEFAULT_CELL_METERS]
    if len(values) == 1:
        values = values * n
    if len(values) != n:
        raise ValueError(f"{name} has {len(values)} entries, matrix needs {n}")
    if any(v <= 0 for v in values):
        raise ValueError(f"{name} entries must be positive")
    return [float(v) for v in values]


def _coerce(cls, key: str, raw: str):
    fields = {f.name: f for f in dataclasses.fields(cls)}
    if key not in fields:
        raise KeyError(f"unknown key {key!r} for [{cls.__name__}]")
    default = fields[key].default
    raw = raw.strip()
    if raw == "" or raw.lower() == "none":
        return None
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes", "on")
    if isinstance(default, int) or key in ("t_max",):
        return int(raw)
    return float(raw)


def _floats(raw: str) -> list[float]:
    return [float(x) for x in raw.split(",") if x.strip()]


def build(values: dict[str, dict[str, str]]) -> RunConfig:
    """Build a config from ``{section: {key: raw string}}``."""
    kwargs: dict[str, Any] = {}
    for name, cls in SECTIONS.items():
        section = values.get(name, {})
        kwargs[name] = cls(**{k: _coerce(cls, k, v) for k, v in section.items()})
    dims = values.get("dimensions", {})
    run = values.get("run", {})
    unknown = set(values) - set(SECTIONS) - {"dimensions", "run"}
    if unknown:
        raise KeyError(f"unknown config sections: {sorted(unknown)}")
    return RunConfig(
        **kwargs,
        row_widths=_floats(dims["row_widths"]) if dims.get("row_widths") else None,
        col_widths=_floats(dims["col_widths"]) if dims.get("col_widths") else None,
        output=run.get("output") or None,
        verbose=run.get("verbose", "false").lower() in ("1", "true", "yes", "on"),
    )


def load(path: str | Path | None = None, overrides: list[str] = ()) -> RunConfig:
    """Read an INI file (optional) and apply ``section.key=value`` overrides."""
    values: dict[str, dict[str, str]] = {}
    if path is not None:
        cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        with open(path) as f:
            cp.read_file(f)
        values = {s: dict(cp[s]) for s in cp.sections()}
    for item in overrides:
        key, sep, value = item.partition("=")
        section, dot, name = key.partition(".")
        if not sep or not dot:
            raise ValueError(f"override {item!r} is not section.key=value")
        values.setdefault(section.strip(), {})[name.strip()] = value
    return build(values)
