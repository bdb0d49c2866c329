"""Phillips-curve relations built on the Newtonian kernel."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroUnemployment
from .kernels import SourceGrid, inflation_selfconsistent


@dataclass(frozen=True)
class PhillipsSample:
    u: float
    capital_rate: float
    inflation: float

    def __post_init__(self):
        if not self.u > 0:
            raise ZeroUnemployment(f"unemployment must be positive, got {self.u!r}")


def capital_rate(u):
    """Capital growth rate ``dK/dt = 1/u``."""
    u = np.asarray(u, dtype=float)
    if np.any(~(u > 0)):
        raise ZeroUnemployment("unemployment rate must be positive")
    out = 1.0 / u
    return float(out) if out.ndim == 0 else out


def region_source(region: SourceGrid, rate):
    """Uniform source of strength ``rate`` on the nonzero support of ``region``."""
    mask = region.values != 0 if region.values.ndim == 3 else np.any(region.values != 0, axis=-1)
    return region.with_values(np.where(mask, float(rate), 0.0))


def phillips_curve(u_values, region: SourceGrid, expectations: SourceGrid | None, x):
    """Inflation at ``x`` for each unemployment rate.

    The capital-rate source ``1/u`` fills the support of ``region`` uniformly;
    only that support matters, so a vector-valued ``region`` acts as its mask.
    ``expectations`` is the scalar inflation-acceleration source (zero if
    ``None``). Inflation is returned signed.
    """
    if expectations is None:
        expectations = region.with_values(np.zeros(region.shape))
    samples = []
    for u in u_values:
        rate = capital_rate(u)
        pi = inflation_selfconsistent(region_source(region, rate), expectations, x)
        samples.append(PhillipsSample(float(u), rate, float(pi)))
    return samples
