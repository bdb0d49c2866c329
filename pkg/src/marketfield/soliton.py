"""Closed-form one-soliton solutions of the choice field.

Two argument conventions coexist here and are deliberately kept apart:

* curve components use ``x = 2*beta*(s - 2*tau*t)`` and ``y = 4*beta*tau*t``;
* derived fields (Berry phase, non-price competition, profit) use
  ``X = 2*beta*(S + tau*r*t/(4*pi*L))`` and ``Y = beta*tau*t/(2*pi*L)``.

No identity linking the two sets is assumed anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import OutOfDomain, ZeroRadius

DEMAND_SCALE = 16.0 * math.pi**2


@dataclass(frozen=True)
class SolitonParams:
    """Parameter record shared by every closed form.

    ``nu`` is not stored; it is always recomputed as ``2*tau/beta``.
    """

    beta: float = 0.5
    tau: float = 0.25
    l_scale: float = 1.0
    L: float = 5.0
    activity: float = 1.0
    gamma: float = 1.0
    d: float = 1.0

    def __post_init__(self):
        for name in ("beta", "L", "d"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        for name in ("tau", "l_scale", "activity", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def nu(self) -> float:
        return 2.0 * self.tau / self.beta

    @property
    def amplitude(self) -> float:
        """Common prefactor ``1 / (beta (1 + nu^2))``."""
        return 1.0 / (self.beta * (1.0 + self.nu**2))


@dataclass(frozen=True)
class ChoiceComponents:
    c1: np.ndarray
    c2: np.ndarray
    c3: np.ndarray


@dataclass(frozen=True)
class DerivedFields:
    theta3: np.ndarray
    c3: np.ndarray
    p3: np.ndarray


def sech(x):
    """Overflow-free hyperbolic secant."""
    a = np.abs(np.asarray(x, dtype=float))
    e = np.exp(-a)
    return 2.0 * e / (1.0 + e * e)


def log_cosh(x):
    """``ln cosh x`` without overflow for large ``|x|``."""
    a = np.abs(np.asarray(x, dtype=float))
    return a + np.log1p(np.exp(-2.0 * a)) - math.log(2.0)


def _curve_args(params, s, t):
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    x = 2.0 * params.beta * (s - 2.0 * params.tau * t)
    y = 4.0 * params.beta * params.tau * t
    return x, y


def curvature(params: SolitonParams, s, t):
    """Sech soliton ``4 beta sech(2 beta (s - 2 tau t))``; peak ``4 beta`` at ``s = 2 tau t``."""
    x, _ = _curve_args(params, s, t)
    return 4.0 * params.beta * sech(x)


def hasimoto_psi(params: SolitonParams, s, t, torsion=None):
    """Hasimoto wave function ``kappa * exp(i * int_0^s tau ds')``.

    With ``torsion=None`` the constant ``params.tau`` is used and the phase is
    exactly ``tau * s``. A callable ``torsion(s)`` is integrated numerically
    from 0 to each ``s``.
    """
    kappa = curvature(params, s, t)
    s_arr = np.asarray(s, dtype=float)
    if torsion is None:
        phase = params.tau * s_arr
    else:
        flat = np.atleast_1d(s_arr).ravel()
        phase = np.array(
            [integrate.quad(torsion, 0.0, si, epsabs=1e-13, epsrel=1e-12, limit=200)[0] for si in flat]
        ).reshape(s_arr.shape)
    return kappa * np.exp(1j * phase)


def choice_components(params: SolitonParams, s, t) -> ChoiceComponents:
    """Components of the choice curve along the price, goods and capital axes."""
    x, y = _curve_args(params, s, t)
    nu = params.nu
    amp = params.amplitude
    lam = params.l_scale
    c1 = amp * (np.sin(nu * x) * sech(x) + np.sin(nu * y) * sech(y))
    c2 = lam * amp * (np.cos(nu * x) * sech(x) - np.cos(nu * y) * sech(y))
    c3 = np.asarray(s, dtype=float) - lam * amp * (np.tanh(x) + np.tanh(y))
    return ChoiceComponents(c1, c2, c3)


def choice_magnitude_pq(params: SolitonParams, s, t):
    """Magnitude of choice projected on the (price, goods) plane."""
    comp = choice_components(params, s, t)
    return np.hypot(comp.c1, comp.c2)


def derived_field_args(params: SolitonParams, S, t, r):
    S = np.asarray(S, dtype=float)
    t = np.asarray(t, dtype=float)
    b, tau, L = params.beta, params.tau, params.L
    X = 2.0 * b * (S + tau * r * t / (4.0 * math.pi * L))
    Y = b * tau * t / (2.0 * math.pi * L)
    return X, Y


def derived_fields(params: SolitonParams, S, t, x1, x2) -> DerivedFields:
    """Berry-phase, non-price competition and profit components along the capital axis.

    Raises
    ------
    ZeroRadius
        If ``x1 = x2 = 0``; the profit component divides by ``x1^2 + x2^2``.
    """
    r2 = float(x1) ** 2 + float(x2) ** 2
    if r2 == 0.0:
        raise ZeroRadius("profit component is singular at x1 = x2 = 0")
    r = math.sqrt(r2)
    X, Y = derived_field_args(params, S, t, r)
    denom = 1.0 + params.nu**2
    theta3 = (log_cosh(X) - log_cosh(Y)) / (params.beta * denom)
    sech2_x = sech(X) ** 2
    sech2_y = sech(Y) ** 2
    c3 = params.beta * params.activity / denom * (sech2_y - sech2_x)
    p3 = 2.0 * params.beta * params.tau / denom * (X * np.asarray(t, dtype=float) / r2) * sech2_y
    return DerivedFields(theta3, c3, p3)


def demand_radius(ch_mag, a: float = DEMAND_SCALE):
    """Radius ``a * arcsech(|C_h|)`` of the demand circle ``P^2 + Q^2 = R^2``."""
    m = np.asarray(ch_mag, dtype=float)
    if np.any(~(m > 0.0)) or np.any(m > 1.0):
        raise OutOfDomain("choice magnitude must lie in (0, 1]")
    # 2 artanh(sqrt((1 - m)/(1 + m))) keeps precision near m = 1; arccosh(1/m)
    # stays finite for tiny m
    with np.errstate(divide="ignore", over="ignore"):
        near_one = 2.0 * np.arctanh(np.sqrt((1.0 - m) / (1.0 + m)))
        small = np.arccosh(1.0 / m)
    return a * np.where(m > 0.5, near_one, small)


def demand_curve_family(P, Q, a: float = DEMAND_SCALE):
    """Choice magnitude ``sech(sqrt(P^2+Q^2)/a)`` and demand radius over a (P, Q) grid.

    Returns ``(ch, R)`` with the broadcast shape of ``P`` and ``Q``.
    """
    rho = np.hypot(np.asarray(P, dtype=float), np.asarray(Q, dtype=float))
    ch = sech(rho / a)
    return ch, demand_radius(ch, a)


def peak_trajectory(params: SolitonParams, t_values, s_grid):
    """Location of the curvature maximum along ``s`` for each time.

    The grid argmax is refined by a three-point parabola through the
    neighbouring samples.
    """
    s_grid = np.asarray(s_grid, dtype=float)
    h = s_grid[1] - s_grid[0]
    peaks = []
    for t in np.atleast_1d(t_values):
        k = curvature(params, s_grid, t)
        i = int(np.argmax(k))
        if 0 < i < len(s_grid) - 1:
            fm, f0, fp = k[i - 1], k[i], k[i + 1]
            den = fm - 2.0 * f0 + fp
            shift = 0.5 * (fm - fp) / den if den != 0.0 else 0.0
            peaks.append(s_grid[i] + shift * h)
        else:
            peaks.append(s_grid[i])
    return np.array(peaks)
