"""Frenet-Serret integration and reconstruction of the soliton choice curve."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import InvalidStep
from .soliton import SolitonParams, choice_components, curvature


@dataclass(frozen=True)
class FrenetFrame:
    tangent: np.ndarray
    normal: np.ndarray
    binormal: np.ndarray

    @classmethod
    def identity(cls):
        return cls(np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0]))

    def as_matrix(self):
        """Rows are tangent, normal, binormal."""
        return np.vstack([self.tangent, self.normal, self.binormal])


@dataclass(frozen=True)
class Curve:
    """Sampled space curve.

    ``frames`` has shape ``(n, 3, 3)`` with rows (tangent, normal, binormal)
    per sample.
    """

    s: np.ndarray
    positions: np.ndarray
    frames: np.ndarray
    step: float

    @property
    def tangents(self):
        return self.frames[:, 0, :]

    @property
    def normals(self):
        return self.frames[:, 1, :]

    @property
    def binormals(self):
        return self.frames[:, 2, :]

    def frame(self, i) -> FrenetFrame:
        f = self.frames[i]
        return FrenetFrame(f[0].copy(), f[1].copy(), f[2].copy())

    def gram_drift(self):
        """Maximum deviation of ``F F^T`` from the identity over all samples."""
        gram = np.einsum("nij,nkj->nik", self.frames, self.frames)
        return float(np.max(np.abs(gram - np.eye(3))))


@dataclass(frozen=True)
class AlignmentReport:
    rms_after_alignment: float
    rotation: np.ndarray
    translation: np.ndarray


def _sample_profile(f, s):
    """Evaluate a profile at every point of ``s``, vectorised when ``f`` allows it."""
    if not callable(f):
        return np.full(s.shape, float(f))
    try:
        values = np.asarray(f(s), dtype=float)
        if values.shape == s.shape:
            return values
    except (TypeError, ValueError):
        pass
    return np.array([float(f(si)) for si in s])


def _generator(k, w):
    """Linear generator acting on the stacked state rows (position, t, n, b)."""
    return np.array([[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, k, 0.0], [0.0, -k, 0.0, w], [0.0, 0.0, -w, 0.0]])


def _reorthonormalize(state):
    t = state[1] / math.sqrt(state[1] @ state[1])
    n = state[2] - (state[2] @ t) * t
    n /= math.sqrt(n @ n)
    state[1] = t
    state[2] = n
    state[3] = np.cross(t, n)
    return state


def integrate_frenet(kappa, tau, s_range, step, initial=None, origin=None) -> Curve:
    """Integrate the Frenet-Serret system together with ``dX/ds = tangent``.

    Classical RK4 on the 12 coupled unknowns, followed by Gram-Schmidt
    re-orthonormalisation of the frame after every step. The number of steps
    is ``ceil(extent / step)``, so the actual spacing (``Curve.step``) may be
    slightly smaller than requested.

    Parameters
    ----------
    kappa, tau : callable or float
        Curvature and torsion profiles as functions of arclength.
    s_range : (float, float)
    step : float
    initial : FrenetFrame, optional
        Defaults to the identity frame.
    origin : array_like, optional
        Starting position, defaults to the origin.
    """
    s0, s1 = map(float, s_range)
    extent = s1 - s0
    if not (math.isfinite(extent) and extent > 0):
        raise InvalidStep(f"empty or non-finite arclength range {s_range!r}")
    if not (step > 0) or step > extent:
        raise InvalidStep(f"step must lie in (0, {extent}], got {step!r}")
    n_steps = int(math.ceil(extent / step - 1e-12))
    h = extent / n_steps
    s = s0 + h * np.arange(n_steps + 1)
    s[-1] = s1
    # profiles at the step nodes and midpoints
    s_half = s[:-1] + 0.5 * h
    k_node, w_node = _sample_profile(kappa, s), _sample_profile(tau, s)
    k_mid, w_mid = _sample_profile(kappa, s_half), _sample_profile(tau, s_half)

    frame = (initial or FrenetFrame.identity()).as_matrix().astype(float)
    start = np.zeros(3) if origin is None else np.asarray(origin, dtype=float)
    states = np.empty((n_steps + 1, 4, 3))
    y = np.vstack([start, frame])
    states[0] = y

    for i in range(n_steps):
        m_a = _generator(k_node[i], w_node[i])
        m_b = _generator(k_mid[i], w_mid[i])
        m_c = _generator(k_node[i + 1], w_node[i + 1])
        d1 = m_a @ y
        d2 = m_b @ (y + 0.5 * h * d1)
        d3 = m_b @ (y + 0.5 * h * d2)
        d4 = m_c @ (y + h * d3)
        y = _reorthonormalize(y + h / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4))
        states[i + 1] = y

    positions = states[:, 0, :].copy()
    frames = states[:, 1:, :].copy()
    return Curve(s=s, positions=positions, frames=frames, step=h)


def rigid_align(source, target):
    """Least-squares rotation + translation mapping ``source`` onto ``target``.

    Kabsch/SVD solution with the reflection case excluded.
    """
    source = np.asarray(source, dtype=float)
    target = np.asarray(target, dtype=float)
    mu_s = source.mean(axis=0)
    mu_t = target.mean(axis=0)
    H = (source - mu_s).T @ (target - mu_t)
    U, _, Vt = np.linalg.svd(H)
    sign = np.sign(np.linalg.det(Vt.T @ U.T)) or 1.0
    D = np.diag([1.0, 1.0, sign])
    R = Vt.T @ D @ U.T
    translation = mu_t - R @ mu_s
    aligned = source @ R.T + translation
    rms = float(np.sqrt(np.mean(np.sum((aligned - target) ** 2, axis=1))))
    return AlignmentReport(rms, R, translation)


def reconstruct_soliton_curve(params: SolitonParams, t, s_range=None, step=1e-3):
    """Rebuild the choice curve from the soliton curvature and constant torsion.

    The integrated curve is rigidly aligned to the closed-form components
    sampled at the same arclengths. The RMS in the report is informational:
    the closed-form components are not guaranteed to be arclength
    parametrised.
    """
    if s_range is None:
        s_range = (-params.L, params.L)
    curve = integrate_frenet(lambda s: curvature(params, s, t), params.tau, s_range, step)
    comp = choice_components(params, curve.s, t)
    target = np.column_stack([comp.c1, comp.c2, comp.c3])
    return curve, rigid_align(curve.positions, target)


def binormal_velocity(curve: Curve, kappa):
    """Binormal-flow velocity ``kappa(s) * b(s)`` at every curve sample."""
    if callable(kappa):
        k = np.asarray([kappa(si) for si in curve.s], dtype=float)
    else:
        k = np.full(len(curve.s), float(kappa))
    return k[:, None] * curve.binormals


def polarization_rotation(tau, L, breakpoints=None):
    """Rotation angle ``int_0^L tau(s) ds`` of the wave polarisation.

    ``breakpoints`` are passed to the quadrature for piecewise profiles.
    """
    if L <= 0:
        raise ValueError("L must be positive")
    if not callable(tau):
        return float(tau) * float(L)
    points = None
    if breakpoints is not None:
        points = [p for p in breakpoints if 0.0 < p < L] or None
    value, _ = integrate.quad(tau, 0.0, float(L), points=points, epsabs=1e-13, epsrel=1e-13, limit=200)
    return value
