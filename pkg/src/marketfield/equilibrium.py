"""Money dynamics, Berry connection/phase and field-equation residuals.

Inner products are conjugate-linear in the first slot:
``(a, b) = sum(conj(a) * b)``. With this convention a pure phase family
``exp(i theta(X)) u`` has connection ``i (m, dm/dX) = -theta'(X)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate

from .errors import IncompleteGrid, MeshBoundaryMismatch, OpenContour, TooFewSamples, TooFewSlices


def inner(a, b):
    return np.vdot(np.asarray(a), np.asarray(b))


@dataclass
class MoneyState:
    """Money supply ``M = sum_k C_k m_k(X)``.

    ``basis(X)`` returns an ``(n, dim)`` array whose rows are unit vectors.
    """

    coefficients: np.ndarray
    basis: object
    activity: float = 1.0

    def total(self, x):
        m = np.asarray(self.basis(x))
        return np.asarray(self.coefficients) @ m


def activity_of(money_trajectory, dt):
    """Market activity ``A = i (M, dM/dt)`` along a sampled trajectory.

    ``money_trajectory`` has shape ``(n_t, dim)``. The time derivative uses
    second-order centred differences (one-sided at the two ends). The result
    is complex; for normalised trajectories the imaginary part is
    discretisation noise.
    """
    M = np.asarray(money_trajectory, dtype=complex)
    if M.ndim == 1:
        M = M[:, None]
    if len(M) < 3:
        raise TooFewSamples("activity needs at least 3 samples")
    dM = np.gradient(M, dt, axis=0, edge_order=2)
    return 1j * np.sum(np.conj(M) * dM, axis=1)


def _quad_complex(f, t):
    re = integrate.quad(lambda s: np.real(f(s)), 0.0, t, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    im = integrate.quad(lambda s: np.imag(f(s)), 0.0, t, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    return re + 1j * im


def evolve_coefficient(connection, activity, t):
    """Coefficient ``C_n(t) = exp(-int_0^t [(m_n, dm_n/dt) + i A] dt')``.

    ``connection(t)`` returns the inner product ``(m_n, dm_n/dt)``;
    ``activity(t)`` the market activity. Either may be a constant.
    """
    conn = connection if callable(connection) else (lambda s, c=complex(connection): c)
    act = activity if callable(activity) else (lambda s, a=float(activity): a)
    exponent = _quad_complex(lambda s: conn(s) + 1j * act(s), float(t))
    return np.exp(-exponent)


def _centred_derivative(f, x, dx):
    """Five-point centred derivative. The second-order stencil leaves a real
    part of order ``dx^2`` in ``(m, dm/dX)`` even for exactly normalised
    families; this one pushes it below roundoff."""
    v = lambda k: np.asarray(f(x + k * dx), dtype=complex)
    return (v(-2) - 8.0 * v(-1) + 8.0 * v(1) - v(2)) / (12.0 * dx)


def berry_connection(basis_vector, x, dx=1e-4):
    """Choice connection ``i (m, dm/dX)`` with a centred difference for the derivative.

    Returned as a complex number; its imaginary part measures how far the
    family is from normalised.
    """
    m = np.asarray(basis_vector(x), dtype=complex)
    return 1j * inner(m, _centred_derivative(basis_vector, x, dx))


def parallel_transport_check(basis_family, x, dx=1e-4):
    """Matrix of ``(m_n, dm_k/dX)`` with the diagonal set to zero.

    ``basis_family(X)`` returns an ``(n, dim)`` array of basis vectors.
    """
    m = np.asarray(basis_family(x), dtype=complex)
    if m.ndim != 2 or len(m) < 2:
        raise ValueError("parallel transport check needs at least two basis vectors")
    dm = _centred_derivative(basis_family, x, dx)
    out = np.conj(m) @ dm.T
    np.fill_diagonal(out, 0.0)
    return out


def _check_closed(contour):
    c = np.asarray(contour, dtype=float)
    if len(c) < 2 or not np.allclose(c[0], c[-1], rtol=0.0, atol=1e-12):
        raise OpenContour("contour must end where it starts")
    return c


def berry_phase_line(field_fn, contour):
    """Circulation ``sum C_h(midpoint) . dX`` around a closed polyline."""
    c = _check_closed(contour)
    mid = 0.5 * (c[1:] + c[:-1])
    dx = np.diff(c, axis=0)
    return float(np.sum(np.einsum("ij,ij->i", np.asarray(field_fn(mid), dtype=float), dx)))


def curl_fd(field_fn, points, h=1e-5):
    """Curl of a vector field sampler by centred differences at ``points``."""
    p = np.asarray(points, dtype=float)
    J = np.empty(p.shape[:-1] + (3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        J[..., :, j] = (np.asarray(field_fn(p + e)) - np.asarray(field_fn(p - e))) / (2 * h)
    return np.stack(
        [J[..., 2, 1] - J[..., 1, 2], J[..., 0, 2] - J[..., 2, 0], J[..., 1, 0] - J[..., 0, 1]], axis=-1
    )


@dataclass(frozen=True)
class SurfaceMesh:
    vertices: np.ndarray
    triangles: np.ndarray

    def boundary_edges(self):
        """Directed edges used by exactly one triangle."""
        count = {}
        directed = {}
        for tri in self.triangles:
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                key = (min(a, b), max(a, b))
                count[key] = count.get(key, 0) + 1
                directed[key] = (int(a), int(b))
        return [directed[k] for k, n in count.items() if n == 1]


def disk_mesh(radius, n_segments=1000, n_rings=8, center=(0.0, 0.0, 0.0)):
    """Triangulated disk in the (X1, X2) plane and its counter-clockwise boundary contour."""
    center = np.asarray(center, dtype=float)
    phi = 2.0 * np.pi * np.arange(n_segments) / n_segments
    verts = [center]
    for k in range(1, n_rings + 1):
        rho = radius * k / n_rings
        ring = np.column_stack([rho * np.cos(phi), rho * np.sin(phi), np.zeros(n_segments)]) + center
        verts.extend(ring)
    verts = np.array(verts)
    tris = []

    def vid(k, j):
        return 1 + (k - 1) * n_segments + (j % n_segments)

    for j in range(n_segments):
        tris.append((0, vid(1, j), vid(1, j + 1)))
    for k in range(1, n_rings):
        for j in range(n_segments):
            a, b = vid(k, j), vid(k, j + 1)
            c, d = vid(k + 1, j), vid(k + 1, j + 1)
            tris.append((a, c, d))
            tris.append((a, d, b))
    outer = [vid(n_rings, j) for j in range(n_segments)] + [vid(n_rings, 0)]
    return SurfaceMesh(verts, np.array(tris, dtype=int)), verts[outer]


def berry_phase_surface(field_fn, mesh: SurfaceMesh, boundary=None, h=1e-5):
    """Profit flux ``sum rot C_h(centroid) . dS`` through a triangulated surface.

    If ``boundary`` (a closed polyline) is given, it must trace exactly the
    mesh boundary edges in the mesh's orientation.
    """
    v = np.asarray(mesh.vertices, dtype=float)
    tri = np.asarray(mesh.triangles, dtype=int)
    if boundary is not None:
        _match_boundary(v, mesh.boundary_edges(), _check_closed(boundary))
    a, b, c = v[tri[:, 0]], v[tri[:, 1]], v[tri[:, 2]]
    area = 0.5 * np.cross(b - a, c - a)
    centroid = (a + b + c) / 3.0
    return float(np.sum(np.einsum("ij,ij->i", curl_fd(field_fn, centroid, h), area)))


def _match_boundary(v, edges, contour, atol=1e-9):
    seg = list(zip(contour[:-1], contour[1:]))
    if len(seg) != len(edges):
        raise MeshBoundaryMismatch(f"contour has {len(seg)} segments, mesh boundary has {len(edges)} edges")
    key = lambda p: tuple(np.round(np.asarray(p) / atol).astype(np.int64))
    mesh_set = {(key(v[i]), key(v[j])) for i, j in edges}
    for p, q in seg:
        if (key(p), key(q)) not in mesh_set:
            raise MeshBoundaryMismatch("contour does not follow the mesh boundary")


# ---------------------------------------------------------------------------
# Gridded fields and residuals


@dataclass
class FieldGrid:
    """Fields sampled on a uniform space-time grid.

    Vector fields have shape ``(nt, nx, ny, nz, 3)``, scalars
    ``(nt, nx, ny, nz)``. ``C``, ``P`` and ``K`` may be ``None`` until filled.
    ``one_sided_slices`` lists the time indices whose time derivative came
    from a one-sided stencil.
    """

    origin: np.ndarray
    spacing: np.ndarray
    t0: float
    dt: float
    ch: np.ndarray
    phi: np.ndarray
    lnM: np.ndarray | None = None
    C: np.ndarray | None = None
    P: np.ndarray | None = None
    K: np.ndarray | None = None
    one_sided_slices: tuple = field(default_factory=tuple)

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=float).reshape(3)
        self.spacing = np.asarray(self.spacing, dtype=float).reshape(3)
        if np.any(self.spacing <= 0) or not self.dt > 0:
            raise ValueError("spacing and dt must be positive")

    @property
    def shape(self):
        return self.phi.shape

    def coordinates(self):
        """Time axis and spatial meshgrid ``(X1, X2, X3)``."""
        nt, nx, ny, nz = self.shape
        t = self.t0 + self.dt * np.arange(nt)
        axes = [self.origin[i] + self.spacing[i] * np.arange(n) for i, n in enumerate((nx, ny, nz))]
        return t, np.meshgrid(*axes, indexing="ij")

    @classmethod
    def from_functions(cls, ch_fn, phi_fn, origin, spacing, shape, t0, dt, lnM_fn=None):
        """Sample ``ch_fn(t, X1, X2, X3) -> (3, ...)`` and scalar ``phi_fn``/``lnM_fn``."""
        nt, nx, ny, nz = shape
        origin = np.asarray(origin, dtype=float)
        spacing = np.asarray(spacing, dtype=float)
        axes = [origin[i] + spacing[i] * np.arange(n) for i, n in enumerate((nx, ny, nz))]
        X = np.meshgrid(*axes, indexing="ij")
        t = t0 + dt * np.arange(nt)
        T = t[:, None, None, None]
        X = [x[None] for x in X]
        ch = np.stack(np.broadcast_arrays(*ch_fn(T, *X)), axis=-1) * np.ones((nt, nx, ny, nz, 1))
        phi = np.broadcast_to(phi_fn(T, *X), (nt, nx, ny, nz)).astype(float)
        lnM = None if lnM_fn is None else np.broadcast_to(lnM_fn(T, *X), (nt, nx, ny, nz)).astype(float)
        return cls(origin, spacing, t0, dt, ch, phi, lnM)


def _grad2(f, h, axis):
    return np.gradient(f, h, axis=axis, edge_order=2)


def _curl2(F, h):
    d = lambda comp, ax: _grad2(F[..., comp], h[ax], ax + 1)
    return np.stack([d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)], axis=-1)


def construct_fields(grid: FieldGrid) -> FieldGrid:
    """Fill competition ``C = -dC_h/dt - grad phi`` and profit ``P = rot C_h``.

    Second-order centred differences in time and space; the first and last
    time slices use one-sided stencils and are recorded in
    ``one_sided_slices``. ``K = grad lnM`` is filled when ``lnM`` is present.
    """
    nt = grid.shape[0]
    if nt < 3:
        raise TooFewSlices("need at least 3 time slices")
    h = grid.spacing
    dch_dt = _grad2(grid.ch, grid.dt, 0)
    grad_phi = np.stack([_grad2(grid.phi, h[i], i + 1) for i in range(3)], axis=-1)
    C = -dch_dt - grad_phi
    P = _curl2(grid.ch, h)
    K = None
    if grid.lnM is not None:
        K = np.stack([_grad2(grid.lnM, h[i], i + 1) for i in range(3)], axis=-1)
    return replace(grid, C=C, P=P, K=K, one_sided_slices=(0, nt - 1))


# Residuals are measured with fourth-order centred differences so that they
# expose the truncation error of the second-order stencils used to build the
# fields instead of cancelling against them.


def _d4(f, h, axis):
    """Fourth-order centred derivative on interior points (2 layers trimmed on ``axis``)."""
    n = f.shape[axis]
    sl = lambda a, b: tuple(slice(a, n + b if b else None) if i == axis else slice(None) for i in range(f.ndim))
    return (-f[sl(4, 0)] + 8 * f[sl(3, -1)] - 8 * f[sl(1, -3)] + f[sl(0, -4)]) / (12 * h)


def _trim(f, axis_list, k=2):
    idx = [slice(None)] * f.ndim
    for ax in axis_list:
        idx[ax] = slice(k, f.shape[ax] - k)
    return f[tuple(idx)]


def _D(f, ax, step):
    """Fourth-order derivative along ``ax`` (0 = time, 1..3 = space) restricted to the common interior."""
    others = [a for a in range(4) if a != ax]
    return _trim(_d4(f, step, ax), others)


def _div(F, h):
    return sum(_D(F[..., i], i + 1, h[i]) for i in range(3))


def _curl(F, h):
    d = lambda comp, ax: _D(F[..., comp], ax + 1, h[ax])
    return np.stack([d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)], axis=-1)


def _dt(F, dt):
    return _D(F, 0, dt)


def _dt2(f, dt):
    d2 = (-f[4:] + 16 * f[3:-1] - 30 * f[2:-2] + 16 * f[1:-3] - f[:-4]) / (12 * dt * dt)
    return _trim(d2, [1, 2, 3])


@dataclass(frozen=True)
class ResidualReport:
    """Maximum and RMS residual per equation over interior grid points.

    Keys name the equation (see :func:`residual_check`); equations whose
    inputs are absent from the grid are omitted.
    """

    max_abs: dict
    rms: dict

    def __getitem__(self, eq):
        return self.max_abs[eq]


def _stats(r, extra):
    r = np.abs(_trim(np.asarray(r), [0, 1, 2, 3], extra))
    return float(r.max()), float(np.sqrt(np.mean(r**2)))


def residual_check(grid: FieldGrid, margin=2) -> ResidualReport:
    """Residuals of the equilibrium equations at interior points.

    * ``money_flow``: ``div C + d lnM/dt``
    * ``competition_curl``: ``rot C + dP/dt``
    * ``profit_divergence``: ``div P``
    * ``profit_curl``: ``rot P - dC/dt - K`` with ``K = grad lnM``
    * ``gauge``: ``div C_h + dphi/dt``
    * ``price_wave``: ``div grad phi - d lnM/dt - d2phi/dt2``

    Only points at least ``margin`` samples from every boundary (space and
    time) are reported. The default keeps the residual stencils inside the grid;
    a larger margin also keeps them off the one-sided boundary values.
    """
    if grid.C is None or grid.P is None:
        raise IncompleteGrid("run construct_fields first (C and P missing)")
    if margin < 2:
        raise ValueError("margin must be at least 2")
    if min(grid.shape) < 2 * margin + 1:
        raise IncompleteGrid(f"every grid dimension needs at least {2 * margin + 1} samples")
    h, dt = grid.spacing, grid.dt
    res = {}
    res["competition_curl"] = _curl(grid.C, h) + _dt(grid.P, dt)
    res["profit_divergence"] = _div(grid.P, h)
    res["gauge"] = _div(grid.ch, h) + _dt(grid.phi, dt)
    if grid.lnM is not None:
        dlnM_dt = _dt(grid.lnM, dt)
        gradlnM = np.stack([_D(grid.lnM, i + 1, h[i]) for i in range(3)], axis=-1)
        res["money_flow"] = _div(grid.C, h) + dlnM_dt
        res["profit_curl"] = _curl(grid.P, h) - _dt(grid.C, dt) - gradlnM
        lap_phi = sum(_D(np.gradient(grid.phi, h[i], axis=i + 1, edge_order=2), i + 1, h[i]) for i in range(3))
        res["price_wave"] = lap_phi - dlnM_dt - _dt2(grid.phi, dt)
    stats = {k: _stats(v, margin - 2) for k, v in sorted(res.items())}
    return ResidualReport({k: v[0] for k, v in stats.items()}, {k: v[1] for k, v in stats.items()})
