"""Run configuration: ``key = value`` files with ``#`` comments."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, ParseError, UnknownKey
from .soliton import DEMAND_SCALE, SolitonParams

FORMATS = ("csv", "svg", "both")


@dataclass
class RunConfig:
    beta: float = 0.5
    tau: float = 0.25
    l_scale: float = 1.0
    L: float = 5.0
    activity: float = 1.0
    gamma: float = 1.0
    d: float = 1.0
    # s range defaults to [-L, L] when left unset
    s_min: float | None = None
    s_max: float | None = None
    t_min: float = 0.0
    t_max: float = 4.0
    n_s: int = 201
    n_t: int = 201
    # fixed (x1, x2) offsets for the derived-field figures: 6 and 7 use the
    # first pair, 8 the alternate pair
    x1: float = 1.0
    x2: float = 1.0
    x1_alt: float = 0.5
    x2_alt: float = 0.0
    # demand family
    p_max: float = 1.5
    n_pq: int = 31
    demand_a: float = DEMAND_SCALE
    output_dir: str = "."
    format: str = "csv"

    def __post_init__(self):
        self.validate()

    @property
    def s_range(self):
        lo = -self.L if self.s_min is None else self.s_min
        hi = self.L if self.s_max is None else self.s_max
        return lo, hi

    @property
    def t_range(self):
        return self.t_min, self.t_max

    def params(self) -> SolitonParams:
        return SolitonParams(
            beta=self.beta, tau=self.tau, l_scale=self.l_scale, L=self.L,
            activity=self.activity, gamma=self.gamma, d=self.d,
        )

    def validate(self):
        try:
            self.params()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.n_s < 2 or self.n_t < 2 or self.n_pq < 2:
            raise ConfigError("sample counts n_s, n_t, n_pq must be at least 2")
        lo, hi = self.s_range
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ConfigError(f"empty s range [{lo}, {hi}]")
        if not (math.isfinite(self.t_min) and math.isfinite(self.t_max) and self.t_min < self.t_max):
            raise ConfigError(f"empty t range [{self.t_min}, {self.t_max}]")
        if self.x1 == 0 and self.x2 == 0 or self.x1_alt == 0 and self.x2_alt == 0:
            raise ConfigError("derived-field offsets must keep r = sqrt(x1^2 + x2^2) > 0")
        if not self.p_max > 0 or not self.demand_a > 0:
            raise ConfigError("p_max and demand_a must be positive")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {', '.join(FORMATS)}")


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
_INT_KEYS = {"n_s", "n_t", "n_pq"}
_STR_KEYS = {"output_dir", "format"}


def _convert(key, raw, lineno):
    if key in _STR_KEYS:
        return raw
    try:
        if key in _INT_KEYS:
            return int(raw)
        value = float(raw)
    except ValueError:
        kind = "an integer" if key in _INT_KEYS else "a number"
        raise ParseError(lineno, f"value for '{key}' is not {kind}: {raw!r}") from None
    return value


def parse_config(text: str) -> RunConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(lineno, f"expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if not key or not raw:
            raise ParseError(lineno, "empty key or value")
        if key not in _FIELDS:
            raise UnknownKey(key, lineno)
        values[key] = _convert(key, raw, lineno)
    return RunConfig(**values)


def load_config(path) -> RunConfig:
    """Read a config file; missing keys keep their defaults."""
    return parse_config(Path(path).read_text(encoding="utf-8"))
