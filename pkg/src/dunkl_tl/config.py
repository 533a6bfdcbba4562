"""Run configuration: strict line-based ``key = value`` files."""

from __future__ import annotations

import ast
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .grid import DEFAULT_POINTS
from .reflection import PRESETS


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    preset: str | None = "z2"
    roots: tuple | None = None
    kappa: float | tuple = 0.5
    L: float = 8.0
    m: int | None = None
    k_min: int = -3
    k_max: int = 6
    M: int = 2
    tol: float = 1e-4
    max_iter: int = 40
    subspace: bool = True
    band_tol: float = 0.05
    clamp_tol: float = 1e-8
    seed: int = 0
    test_window: tuple = field(default=None)
    output_dir: str = "."

    def __post_init__(self):
        if self.roots is None and self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}; choose from {sorted(PRESETS)}")
        if self.roots is not None:
            object.__setattr__(self, "roots", tuple(tuple(float(v) for v in r) for r in self.roots))
            object.__setattr__(self, "preset", None)
        if not isinstance(self.kappa, (int, float)):
            object.__setattr__(self, "kappa", tuple(float(v) for v in self.kappa))
        if self.m is None:
            object.__setattr__(self, "m", DEFAULT_POINTS.get(self.dimension))
        if self.test_window is None:
            object.__setattr__(self, "test_window", (self.k_min + 1, self.k_max - 1))
        else:
            object.__setattr__(self, "test_window", tuple(int(v) for v in self.test_window))
        checks = [
            (self.L > 0, "L must be positive"),
            (self.m is None or (self.m > 0 and self.m % 2 == 0), "m must be a positive even integer"),
            (self.k_min < self.k_max, "k_min must be below k_max"),
            (self.M >= 0, "M must be nonnegative"),
            (self.tol > 0, "tol must be positive"),
            (self.max_iter >= 1, "max_iter must be at least 1"),
            (0 < self.band_tol < 1, "band_tol must lie in (0, 1)"),
            (self.clamp_tol > 0, "clamp_tol must be positive"),
            (self.k_min <= self.test_window[0] <= self.test_window[1] <= self.k_max,
             "test_window must lie inside [k_min, k_max]"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)

    @property
    def dimension(self) -> int:
        if self.roots is not None:
            return len(self.roots[0])
        return {"z2": 1, "z2xz2": 2}[self.preset]

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = [list(x) if isinstance(x, tuple) else x for x in v]
        return d

    def with_overrides(self, **kw) -> "RunConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)


_KEYS = {f.name for f in fields(RunConfig)}


def _value(raw: str):
    low = raw.lower()
    if low in ("true", "false"):
        return low == "true"
    if low in ("none", "null"):
        return None
    try:
        return ast.literal_eval(raw)
    except (ValueError, SyntaxError):
        return raw


def parse_config(text: str) -> RunConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _value(raw)
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} not found")
    return parse_config(path.read_text())
