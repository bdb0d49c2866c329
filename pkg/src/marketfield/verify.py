"""Self-verification suite behind ``marketfield verify``.

Every check returns a nonnegative measured error; it passes when the
measurement is strictly below its tolerance, so a tolerance of 0 always
fails.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass

import numpy as np

from . import equilibrium as eq
from .config import RunConfig
from .frenet import integrate_frenet
from .kernels import (
    Filament,
    SourceGrid,
    biot_savart,
    capital_boundary,
    cutoff_competition,
    lia_competition,
    newtonian_potential_on_grid,
)
from .soliton import SolitonParams, curvature, demand_curve_family, demand_radius, peak_trajectory


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.measured < self.tolerance)


DEFAULT_TOLERANCES = {
    "curvature_peak": 1e-12,
    "soliton_speed": 1e-6,
    "frame_orthonormality": 1e-8,
    "circle_closure": 1e-6,
    "helix_radius": 1e-6,
    "integrator_order": 4.0,
    "stokes_equality": 1e-3,
    "laplacian_source": 0.05,
    "biot_savart_filament": 0.01,
    "biot_savart_refinement": 1e-3,
    "lia_cutoff_identity": 1e-12,
    "connection_reality": 1e-8,
    "connection_phase": 1e-6,
    "residual_convergence": 1.0,
    "demand_monotonicity": 0.5,
}


def check_curvature_peak(params: SolitonParams):
    t = 1.0
    peak_s = 2.0 * params.tau * t
    s = np.linspace(peak_s - 5.0, peak_s + 5.0, 10001)
    k = curvature(params, s, t)
    return abs(k.max() - 4.0 * params.beta), f"max curvature {k.max():.15g} at s={s[np.argmax(k)]:.6g}"


def check_soliton_speed(params: SolitonParams):
    t = np.linspace(0.0, 4.0, 41)
    span = 2.0 * abs(params.tau) * 4.0
    s_grid = np.linspace(-5.0 - span, 5.0 + span, 20001)
    slope = np.polyfit(t, peak_trajectory(params, t, s_grid), 1)[0]
    return abs(slope - 2.0 * params.tau), f"fitted peak speed {slope:.12g}"


def _circle_endpoint_error(n):
    c = integrate_frenet(1.0, 0.0, (0.0, 2.0 * math.pi), 2.0 * math.pi / n)
    return float(np.linalg.norm(c.positions[-1] - c.positions[0]))


def check_circle_closure():
    c = integrate_frenet(1.0, 0.0, (0.0, 2.0 * math.pi), 1e-3)
    err = float(np.linalg.norm(c.positions[-1] - c.positions[0]))
    return err, f"endpoint gap {err:.3g}"


def fit_circle_2d(xy):
    """Algebraic least-squares circle fit; returns (centre, radius)."""
    A = np.column_stack([2 * xy[:, 0], 2 * xy[:, 1], np.ones(len(xy))])
    b = np.sum(xy**2, axis=1)
    cx, cy, c0 = np.linalg.lstsq(A, b, rcond=None)[0]
    return np.array([cx, cy]), math.sqrt(c0 + cx * cx + cy * cy)


def helix_radius(curve, kappa, tau):
    """Radius of an integrated constant-(kappa, tau) curve about its Darboux axis."""
    f0 = curve.frames[0]
    axis = tau * f0[0] + kappa * f0[2]
    axis /= np.linalg.norm(axis)
    e1 = f0[1] - np.dot(f0[1], axis) * axis
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)
    xy = np.column_stack([curve.positions @ e1, curve.positions @ e2])
    return fit_circle_2d(xy)[1]


def check_helix(kappa=0.8, tau=0.6):
    c = integrate_frenet(kappa, tau, (0.0, 20.0), 1e-3)
    r = helix_radius(c, kappa, tau)
    expected = kappa / (kappa**2 + tau**2)
    return abs(r - expected), f"radius {r:.12g} vs {expected:.12g}"


def check_frame_orthonormality(params: SolitonParams):
    drift = max(
        integrate_frenet(lambda s: curvature(params, s, 0.0), params.tau, (-10.0, 10.0), 1e-3).gram_drift(),
        integrate_frenet(0.8, 0.6, (0.0, 20.0), 1e-3).gram_drift(),
    )
    return drift, f"max Gram drift {drift:.3g}"


def check_integrator_order():
    errs = [_circle_endpoint_error(n) for n in (16, 32, 64, 128)]
    ratios = [errs[i] / errs[i + 1] for i in range(3)]
    return max(abs(r - 16.0) for r in ratios), "ratios " + ", ".join(f"{r:.3f}" for r in ratios)


def rotational_field(p):
    p = np.asarray(p, dtype=float)
    return 0.5 * np.stack([-p[..., 1], p[..., 0], np.zeros(p.shape[:-1])], axis=-1)


def check_stokes(radius=1.5):
    mesh, contour = eq.disk_mesh(radius, n_segments=1000, n_rings=8)
    line = eq.berry_phase_line(rotational_field, contour)
    surf = eq.berry_phase_surface(rotational_field, mesh, boundary=contour)
    exact = math.pi * radius**2
    rel = abs(line - surf) / abs(line)
    worst = max(rel, abs(line - exact) / exact, abs(surf - exact) / exact)
    return worst, f"line {line:.9g}, surface {surf:.9g}, analytic {exact:.9g}"


def laplacian_recovery(n=48, radius_cells=16, qualify=5):
    """Relative L-inf error of the 7-point Laplacian of the potential against ``-source``.

    Returns ``(error, pointwise_inside_error, n_points)`` over points at least
    ``qualify`` cells from the support boundary and the grid boundary.
    """
    h = 1.0 / n
    centre = np.full(3, (n // 2) * h)
    R = radius_cells * h

    def bump(p):
        rr = np.sum((p - centre) ** 2, axis=-1) / R**2
        return np.where(rr < 1.0, (1.0 - rr) ** 4, 0.0)

    src = SourceGrid.from_function(bump, (0, 0, 0), (h, h, h), (n, n, n))
    phi = newtonian_potential_on_grid(src)
    lap = np.full_like(phi, np.nan)
    lap[1:-1, 1:-1, 1:-1] = (
        phi[2:, 1:-1, 1:-1] + phi[:-2, 1:-1, 1:-1] + phi[1:-1, 2:, 1:-1] + phi[1:-1, :-2, 1:-1]
        + phi[1:-1, 1:-1, 2:] + phi[1:-1, 1:-1, :-2] - 6.0 * phi[1:-1, 1:-1, 1:-1]
    ) / h**2
    idx = np.indices((n, n, n)).transpose(1, 2, 3, 0)
    r_cells = np.linalg.norm(idx - n // 2, axis=-1)
    to_edge = np.min(np.minimum(idx, n - 1 - idx), axis=-1)
    ok = (np.abs(r_cells - radius_cells) >= qualify) & (to_edge >= qualify)
    inside = ok & (r_cells < radius_cells)
    err = np.abs(lap + src.values)
    scale = src.values.max()
    return float(err[ok].max() / scale), float(np.max(err[inside] / src.values[inside])), int(ok.sum())


def check_laplacian():
    err, inside, npts = laplacian_recovery()
    return err, f"{npts} points, pointwise inside {inside:.4f}"


def straight_filament_error(rho=1.0, gamma=1.0, n_segments=20000):
    half = 100.0 * rho
    z = np.linspace(-half, half, n_segments + 1)
    fil = Filament(np.column_stack([np.zeros_like(z), np.zeros_like(z), z]), gamma=gamma)
    B = biot_savart(fil, np.array([rho, 0.0, 0.0]))
    expected = gamma / (2.0 * math.pi * rho)
    return abs(np.linalg.norm(B) - expected) / expected, B


def circle_filament(n, radius=1.0, gamma=1.0):
    phi = 2.0 * math.pi * np.arange(n) / n
    pts = np.column_stack([radius * np.cos(phi), radius * np.sin(phi), np.zeros(n)])
    return Filament(pts, gamma=gamma, closed=True)


def check_biot_savart():
    err, _ = straight_filament_error()
    return err, f"straight-filament relative error {err:.2e}"


def check_biot_savart_refinement():
    x = np.array([0.3, 0.2, 0.5])
    coarse = biot_savart(circle_filament(200), x)
    fine = biot_savart(circle_filament(400), x)
    change = float(np.linalg.norm(fine - coarse) / np.linalg.norm(fine))
    return change, f"relative change on doubling segments {change:.2e}"


def check_lia_cutoff(params: SolitonParams):
    b = np.array([0.0, 0.6, 0.8])
    kappa = 1.3
    worst = 0.0
    with warnings.catch_warnings():
        # the sweep deliberately reaches r ~ L where the LIA warns
        warnings.simplefilter("ignore")
        for L in (1.0, 5.0, 20.0):
            for d in (0.05 * L, 0.5 * L, 1.5 * L):
                p = SolitonParams(beta=params.beta, tau=params.tau, L=L, d=d, gamma=params.gamma)
                K = capital_boundary(p, kappa, b)
                for r in np.geomspace(1e-3 * L, d, 7):
                    diff = lia_competition(p, kappa, b, r, capital=K) - cutoff_competition(p, kappa, b, r)
                    worst = max(worst, float(np.max(np.abs(diff))))
                worst = max(worst, float(np.max(np.abs(cutoff_competition(p, kappa, b, d)))))
    return worst, "max |LIA with boundary capital - cutoff form| over the (r, d, L) sweep"


def normalized_family(x):
    """Normalised, non-trivially twisting complex 3-vector family."""
    v = np.array([np.cos(x) * np.exp(1j * x**2), np.sin(x) * np.cos(2 * x), np.sin(x) * np.sin(2 * x) * np.exp(-1j * x)])
    return v / np.linalg.norm(v)


def check_connection_reality():
    worst = max(abs(np.imag(eq.berry_connection(normalized_family, x, 1e-4))) for x in np.linspace(-1.0, 1.0, 11))
    return worst, f"max |Re(m, dm/dX)| {worst:.2e}"


def check_connection_phase():
    u = np.array([1.0, 1.0j, 0.0]) / math.sqrt(2.0)
    got = eq.berry_connection(lambda X: np.exp(1j * X**2) * u, 1.0, 1e-4)
    err = abs(got.real + 2.0)
    return err, f"exp(i X^2) u at X=1 gives {got.real:.12g} (expected -2)"


def synthetic_choice(t, x, y, z):
    return (
        np.sin(x) * np.cos(2 * y) * np.sin(z + 1) * np.cos(t),
        np.cos(x + y) * np.sin(y * z) * np.sin(t),
        np.exp(x - y) * np.cos(z) * np.exp(-t),
    )


def synthetic_price(t, x, y, z):
    """Potential ``phi`` with ``div C_h + dphi/dt = 0`` for :func:`synthetic_choice`."""
    d1 = np.cos(x) * np.cos(2 * y) * np.sin(z + 1)
    d2 = -np.sin(x + y) * np.sin(y * z) + z * np.cos(x + y) * np.cos(y * z)
    d3 = -np.exp(x - y) * np.sin(z)
    return -(d1 * np.sin(t) - d2 * np.cos(t) - d3 * np.exp(-t))


def residual_levels(levels=(8, 16, 32, 64), extent=0.5, t_centre=1.0, margin=2):
    """Residual reports on nested grids whose reported interior is the fixed box ``[0, extent]^3``."""
    reports = []
    for n in levels:
        h = extent / n
        grid = eq.FieldGrid.from_functions(
            synthetic_choice, synthetic_price,
            origin=(-margin * h,) * 3, spacing=(h, h, h),
            shape=(2 * margin + 1, n + 1 + 2 * margin, n + 1 + 2 * margin, n + 1 + 2 * margin),
            t0=t_centre - margin * h, dt=h,
        )
        reports.append(eq.residual_check(eq.construct_fields(grid), margin=margin))
    return reports


def check_residual_convergence():
    reports = residual_levels()
    ratios = {k: [reports[i][k] / reports[i + 1][k] for i in range(len(reports) - 1)] for k in ("competition_curl", "profit_divergence")}
    worst = max(abs(r - 4.0) for rs in ratios.values() for r in rs)
    detail = "; ".join(f"{k}: " + ", ".join(f"{r:.3f}" for r in rs) for k, rs in ratios.items())
    return worst, detail


def check_demand_monotonicity():
    m = np.linspace(1e-3, 1.0, 2001)
    R = demand_radius(m)
    violations = int(np.sum(np.diff(R) >= 0)) + int(R[-1] != 0.0)
    _, same = demand_curve_family(np.array([0.6, 0.8, 1.0]), np.array([0.8, 0.6, 0.0]))
    violations += int(np.ptp(same) > 1e-12)
    return float(violations), f"R(1) = {R[-1]:.3g}, {violations} violations"


def run_checks(config: RunConfig | None = None, tolerances=None):
    config = config or RunConfig()
    params = config.params()
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    plan = [
        ("curvature_peak", lambda: check_curvature_peak(params)),
        ("soliton_speed", lambda: check_soliton_speed(params)),
        ("frame_orthonormality", lambda: check_frame_orthonormality(params)),
        ("circle_closure", check_circle_closure),
        ("helix_radius", check_helix),
        ("integrator_order", check_integrator_order),
        ("stokes_equality", check_stokes),
        ("laplacian_source", check_laplacian),
        ("biot_savart_filament", check_biot_savart),
        ("biot_savart_refinement", check_biot_savart_refinement),
        ("lia_cutoff_identity", lambda: check_lia_cutoff(params)),
        ("connection_reality", check_connection_reality),
        ("connection_phase", check_connection_phase),
        ("residual_convergence", check_residual_convergence),
        ("demand_monotonicity", check_demand_monotonicity),
    ]
    results = []
    for name, fn in plan:
        start = time.perf_counter()
        measured, detail = fn()
        elapsed = time.perf_counter() - start
        results.append(CheckResult(name, float(measured), float(tol[name]), f"{detail} [{elapsed:.2f}s]"))
    return results
