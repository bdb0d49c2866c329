"""Integral solutions of the field equations.

Newtonian-potential (Poisson) sums over uniform source grids, Biot-Savart
sums over polyline filaments, the local-induction law and its capital
cutoff. Quadrature is the midpoint rule throughout; the self cell (or any
cell whose centre lies closer than half a spacing) is dropped instead of
regularising the kernel.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .errors import GridMismatch, InvalidCutoff, NonpositiveRadius, OnFilament
from .soliton import SolitonParams

FOUR_PI = 4.0 * math.pi
ON_FILAMENT_EPS = 1e-9


@dataclass(frozen=True)
class SourceGrid:
    """Uniform rectangular grid of source samples.

    ``values`` has shape ``(nx, ny, nz)`` for scalar sources or
    ``(nx, ny, nz, 3)`` for vector sources. Cell ``(i, j, k)`` is centred at
    ``origin + (i, j, k) * spacing``.
    """

    origin: np.ndarray
    spacing: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float).reshape(3))
        object.__setattr__(self, "spacing", np.asarray(self.spacing, dtype=float).reshape(3))
        object.__setattr__(self, "values", np.asarray(self.values))
        if np.any(self.spacing <= 0):
            raise ValueError("grid spacing must be positive")
        if self.values.ndim not in (3, 4) or (self.values.ndim == 4 and self.values.shape[3] != 3):
            raise ValueError("values must have shape (nx, ny, nz) or (nx, ny, nz, 3)")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("source values must be finite")

    @property
    def shape(self):
        return self.values.shape[:3]

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axes(self):
        return [self.origin[i] + self.spacing[i] * np.arange(self.shape[i]) for i in range(3)]

    def centers(self):
        """Cell centres, shape ``(nx, ny, nz, 3)``."""
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    def with_values(self, values):
        return SourceGrid(self.origin, self.spacing, values)

    def congruent(self, other) -> bool:
        return (
            self.values.shape == other.values.shape
            and np.array_equal(self.origin, other.origin)
            and np.array_equal(self.spacing, other.spacing)
        )

    @classmethod
    def from_function(cls, f, origin, spacing, shape):
        """Sample ``f(points)`` (points of shape ``(..., 3)``) at the cell centres."""
        probe = cls(origin, spacing, np.zeros(tuple(shape)))
        return probe.with_values(np.asarray(f(probe.centers()), dtype=float))


@dataclass(frozen=True)
class Filament:
    points: np.ndarray
    gamma: float = 1.0
    closed: bool = False

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 2:
            raise ValueError("filament needs at least two 3-vector points")
        if np.any(np.linalg.norm(np.diff(pts, axis=0), axis=1) == 0):
            raise ValueError("consecutive filament points must be distinct")

    def segments(self):
        """Start and end points of every segment (closing segment included if closed)."""
        pts = self.points
        if self.closed and not np.array_equal(pts[0], pts[-1]):
            pts = np.vstack([pts, pts[:1]])
        return pts[:-1], pts[1:]


def newtonian_potential(sources: SourceGrid, x, chunk=4096):
    """``(1/4pi) * sum value * dV / |x - x_cell|`` over all non-self cells.

    ``x`` may be a single point or an array of points ``(..., 3)``; the result
    has the leading shape of ``x`` followed by ``()`` or ``(3,)``.
    """
    x = np.asarray(x, dtype=float)
    lead = x.shape[:-1]
    targets = x.reshape(-1, 3)
    vector = sources.values.ndim == 4
    vals = sources.values.reshape(-1, 3) if vector else sources.values.reshape(-1)
    mask = np.any(vals != 0, axis=1) if vector else vals != 0
    centers = sources.centers().reshape(-1, 3)[mask]
    vals = vals[mask]
    cutoff = 0.5 * float(sources.spacing.min())

    out = np.zeros((len(targets), 3) if vector else len(targets))
    for lo in range(0, len(targets), chunk):
        tgt = targets[lo : lo + chunk]
        dist = np.linalg.norm(tgt[:, None, :] - centers[None, :, :], axis=-1)
        with np.errstate(divide="ignore"):
            w = np.where(dist < cutoff, 0.0, 1.0 / dist)
        out[lo : lo + chunk] = w @ vals
    out *= sources.cell_volume / FOUR_PI
    return out.reshape(lead + ((3,) if vector else ()))


def newtonian_potential_on_grid(sources: SourceGrid):
    """The same midpoint sum as :func:`newtonian_potential`, evaluated at every cell centre.

    Computed as a zero-padded FFT convolution with the discrete kernel
    ``1/|r|`` (zero at the self cell), which is algebraically identical to the
    direct sum.
    """
    nx, ny, nz = sources.shape
    offs = [sources.spacing[i] * np.arange(-n + 1, n) for i, n in enumerate((nx, ny, nz))]
    R = np.sqrt(sum(np.meshgrid(*[o**2 for o in offs], indexing="ij")))
    with np.errstate(divide="ignore"):
        kernel = np.where(R < 0.5 * sources.spacing.min(), 0.0, 1.0 / R)
    scale = sources.cell_volume / FOUR_PI
    if sources.values.ndim == 3:
        return scale * signal.fftconvolve(sources.values, kernel, mode="valid")
    return scale * np.stack(
        [signal.fftconvolve(sources.values[..., c], kernel, mode="valid") for c in range(3)], axis=-1
    )


def _point_segment_distance(x, a, b):
    ab = b - a
    u = np.clip(np.einsum("ij,ij->i", x - a, ab) / np.einsum("ij,ij->i", ab, ab), 0.0, 1.0)
    closest = a + u[:, None] * ab
    return np.linalg.norm(x - closest, axis=1)


def biot_savart(filament: Filament, x, capital=None):
    """Competition field ``(gamma/4pi) sum (x - x_mid) x de / |x - x_mid|^3 - capital``.

    Raises
    ------
    OnFilament
        If ``x`` is within ``1e-9`` of any segment.
    """
    x = np.asarray(x, dtype=float).reshape(3)
    a, b = filament.segments()
    if np.min(_point_segment_distance(np.broadcast_to(x, a.shape), a, b)) < ON_FILAMENT_EPS:
        raise OnFilament(f"point {x} lies on the filament")
    de = b - a
    rel = x - 0.5 * (a + b)
    dist3 = np.linalg.norm(rel, axis=1) ** 3
    field = filament.gamma / FOUR_PI * np.sum(np.cross(rel, de) / dist3[:, None], axis=0)
    if capital is not None:
        field = field - np.asarray(capital, dtype=float)
    return field


def lia_competition(params: SolitonParams, kappa, binormal, r, capital=None):
    """Local-induction competition ``(gamma kappa/4pi) ln(2L/r) b - K``."""
    if not r > 0:
        raise NonpositiveRadius(f"cross-section radius must be positive, got {r!r}")
    if r > params.L / 10.0:
        warnings.warn(f"r = {r} is not small against L = {params.L}; LIA assumes L >> r", stacklevel=2)
    b = np.asarray(binormal, dtype=float)
    field = params.gamma * kappa / FOUR_PI * math.log(2.0 * params.L / r) * b
    if capital is not None:
        field = field - np.asarray(capital, dtype=float)
    return field


def capital_boundary(params: SolitonParams, kappa, binormal):
    """Capital that makes the competition vanish at the transverse boundary ``r = d``."""
    d, L = params.d, params.L
    if not (0.0 < d < 2.0 * L):
        raise InvalidCutoff(f"cutoff must satisfy 0 < d < 2L, got d={d}, L={L}")
    return params.gamma * kappa / FOUR_PI * math.log(2.0 * L / d) * np.asarray(binormal, dtype=float)


def cutoff_competition(params: SolitonParams, kappa, binormal, r):
    """Competition with the boundary capital absorbed: ``(gamma kappa/4pi) ln(d/r) b``."""
    if not r > 0:
        raise NonpositiveRadius(f"cross-section radius must be positive, got {r!r}")
    return params.gamma * kappa / FOUR_PI * math.log(params.d / r) * np.asarray(binormal, dtype=float)


def inflation_from_sources(capital_rate: SourceGrid, choice_rate, x):
    """Price level from capital growth minus the choice rate: ``N[dK/dt] - dC_h/dt``.

    ``choice_rate`` is a callable of the evaluation point(s) or a constant.
    """
    potential = newtonian_potential(capital_rate, x)
    rate = choice_rate(np.asarray(x, dtype=float)) if callable(choice_rate) else np.asarray(choice_rate, dtype=float)
    return potential - rate


def choice_from_inflation(inflation_rate: SourceGrid, x):
    """Choice generated by the inflation rate, ``-N[dpi/dt]``."""
    return -newtonian_potential(inflation_rate, x)


def inflation_selfconsistent(capital_rate: SourceGrid, inflation_accel: SourceGrid, x):
    """Price level from capital growth and inflation acceleration, ``N[dK/dt + d2pi/dt2]``."""
    if not capital_rate.congruent(inflation_accel):
        raise GridMismatch("capital-rate and inflation-acceleration grids differ")
    summed = capital_rate.with_values(capital_rate.values + inflation_accel.values)
    return newtonian_potential(summed, x)
