import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from marketfield.errors import GridMismatch, InvalidCutoff, NonpositiveRadius, OnFilament
from marketfield.kernels import (
    Filament,
    SourceGrid,
    biot_savart,
    capital_boundary,
    choice_from_inflation,
    cutoff_competition,
    inflation_from_sources,
    inflation_selfconsistent,
    lia_competition,
    newtonian_potential,
    newtonian_potential_on_grid,
)
from marketfield.soliton import SolitonParams
from marketfield.verify import circle_filament, laplacian_recovery, straight_filament_error

# mpmath, 30 digits: (2 / 4 pi) ln(100) and ln(2) / 4 pi
SPOT_LIA = 0.732935598879427740872787427739
SPOT_CUTOFF = 0.0551589000381628983491141080295


def point_source(n=11, h=0.1, mass=1.0):
    vals = np.zeros((n, n, n))
    vals[n // 2, n // 2, n // 2] = mass / h**3
    return SourceGrid((-(n // 2) * h,) * 3, (h, h, h), vals)


def smooth_grid(n=12, vector=False, seed=0):
    h = 0.2
    rng = np.random.default_rng(seed)
    shape = (n, n, n, 3) if vector else (n, n, n)
    return SourceGrid((-1.0, -1.0, -1.0), (h, h, h), rng.normal(size=shape))


def test_source_grid_validation():
    with pytest.raises(ValueError):
        SourceGrid((0, 0, 0), (0.1, 0.0, 0.1), np.zeros((2, 2, 2)))
    with pytest.raises(ValueError):
        SourceGrid((0, 0, 0), (0.1, 0.1, 0.1), np.full((2, 2, 2), np.nan))
    with pytest.raises(ValueError):
        SourceGrid((0, 0, 0), (0.1, 0.1, 0.1), np.zeros((2, 2, 2, 2)))
    g = SourceGrid((0, 0, 0), (0.1, 0.2, 0.5), np.zeros((2, 3, 4)))
    assert g.cell_volume == pytest.approx(0.01)
    assert g.centers().shape == (2, 3, 4, 3)


def test_filament_validation():
    with pytest.raises(ValueError):
        Filament([[0, 0, 0]])
    with pytest.raises(ValueError):
        Filament([[0, 0, 0], [0, 0, 0], [1, 0, 0]])


def test_potential_zero_source():
    g = SourceGrid((0, 0, 0), (1, 1, 1), np.zeros((4, 4, 4)))
    assert newtonian_potential(g, [0.3, 0.2, 9.0]) == 0.0


@pytest.mark.parametrize("rho_cells", [5, 8, 20])
def test_potential_point_source_green_function(rho_cells):
    g = point_source()
    rho = rho_cells * 0.1
    x = np.array([rho, 0.0, 0.0])
    got = newtonian_potential(g, x)
    assert got == pytest.approx(1.0 / (4 * math.pi * rho), rel=1e-2)


def test_potential_self_cell_excluded():
    g = point_source()
    assert newtonian_potential(g, [0.0, 0.0, 0.0]) == 0.0
    assert np.isfinite(newtonian_potential(g, [0.01, 0.0, 0.0]))


def test_potential_linearity():
    f, k = smooth_grid(seed=1), smooth_grid(seed=2)
    x = np.array([[0.05, 0.3, -0.2], [2.0, 1.0, 0.5]])
    lhs = newtonian_potential(f.with_values(f.values + k.values), x)
    rhs = newtonian_potential(f, x) + newtonian_potential(k, x)
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-12 * np.max(np.abs(lhs)))


def test_potential_vector_source_componentwise():
    g = smooth_grid(n=6, vector=True)
    x = np.array([0.11, 0.4, -0.3])
    got = newtonian_potential(g, x)
    assert got.shape == (3,)
    for c in range(3):
        assert got[c] == pytest.approx(newtonian_potential(g.with_values(g.values[..., c]), x), rel=1e-12)


@pytest.mark.parametrize("vector", [False, True])
def test_on_grid_matches_direct_sum(vector):
    g = smooth_grid(n=7, vector=vector)
    fast = newtonian_potential_on_grid(g)
    direct = newtonian_potential(g, g.centers())
    np.testing.assert_allclose(fast, direct, rtol=1e-10, atol=1e-12)


def test_laplacian_recovers_source():
    err, inside, npts = laplacian_recovery()
    assert err < 0.05 and inside < 0.05 and npts > 1000


def test_biot_savart_straight_filament():
    err, B = straight_filament_error(rho=1.0, gamma=2.0)
    assert err < 0.01
    # azimuthal; with the (x - x') x de ordering a filament along +z gives -y at +x
    assert abs(B[0]) < 1e-12 and abs(B[2]) < 1e-12 and B[1] < 0


def test_biot_savart_capital_and_zero_circulation():
    fil = circle_filament(64)
    x = np.array([0.2, -0.1, 0.4])
    k = np.array([0.3, -1.0, 2.0])
    np.testing.assert_allclose(biot_savart(fil, x, capital=k), biot_savart(fil, x) - k, atol=1e-15)
    silent = Filament(fil.points, gamma=0.0, closed=True)
    np.testing.assert_array_equal(biot_savart(silent, x, capital=k), -k)


def test_biot_savart_ring_centre():
    # closed ring of radius a: |B(centre)| = gamma / (2a) along the axis
    B = biot_savart(circle_filament(2000, radius=2.0, gamma=3.0), [0.0, 0.0, 0.0])
    assert np.linalg.norm(B[:2]) < 1e-12
    assert abs(B[2]) == pytest.approx(3.0 / 4.0, rel=1e-5)


def test_biot_savart_refinement():
    x = np.array([0.3, 0.2, 0.5])
    coarse = biot_savart(circle_filament(200), x)
    fine = biot_savart(circle_filament(400), x)
    assert np.linalg.norm(fine - coarse) < 1e-3 * np.linalg.norm(fine)


def test_biot_savart_on_filament():
    fil = Filament([[0, 0, 0], [1, 0, 0]])
    with pytest.raises(OnFilament):
        biot_savart(fil, [0.5, 0.0, 0.0])
    with pytest.raises(OnFilament):
        biot_savart(fil, [0.5, 1e-10, 0.0])
    biot_savart(fil, [0.5, 1e-6, 0.0])


def test_lia_values():
    p = SolitonParams(L=5.0, gamma=1.0)
    b = np.array([0.0, 0.0, 1.0])
    assert np.linalg.norm(lia_competition(p, 2.0, b, 0.1)) == pytest.approx(SPOT_LIA, rel=1e-14)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        np.testing.assert_array_equal(lia_competition(p, 2.0, b, 10.0), 0.0)
    np.testing.assert_array_equal(lia_competition(p, 0.0, b, 0.1), 0.0)


def test_lia_errors_and_warning():
    p = SolitonParams()
    with pytest.raises(NonpositiveRadius):
        lia_competition(p, 1.0, [0, 0, 1], 0.0)
    with pytest.raises(NonpositiveRadius):
        cutoff_competition(p, 1.0, [0, 0, 1], -1.0)
    with pytest.warns(UserWarning):
        lia_competition(p, 1.0, [0, 0, 1], 0.6)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        lia_competition(p, 1.0, [0, 0, 1], 0.5)


def test_cutoff_value_and_boundary():
    p = SolitonParams(d=1.0, gamma=1.0)
    b = np.array([1.0, 0.0, 0.0])
    assert np.linalg.norm(cutoff_competition(p, 1.0, b, 0.5)) == pytest.approx(SPOT_CUTOFF, rel=1e-14)
    np.testing.assert_array_equal(cutoff_competition(p, 1.0, b, 1.0), 0.0)


@pytest.mark.parametrize("d", [0.0, 10.0, 12.0])
def test_capital_boundary_invalid(d):
    p = SolitonParams(L=5.0, d=1.0)
    object.__setattr__(p, "d", d)
    with pytest.raises(InvalidCutoff):
        capital_boundary(p, 1.0, [0, 0, 1])


@settings(max_examples=100, deadline=None)
@given(
    st.floats(0.5, 50.0), st.floats(0.01, 0.99), st.floats(1e-3, 1.0),
    st.floats(-3.0, 3.0), st.floats(0.1, 2.0),
)
def test_lia_cutoff_identity(L, d_frac, r_frac, kappa, gamma):
    p = SolitonParams(L=L, d=2 * L * d_frac, gamma=gamma)
    b = np.array([0.6, 0.0, 0.8])
    r = p.d * r_frac
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lhs = lia_competition(p, kappa, b, r, capital=capital_boundary(p, kappa, b))
    np.testing.assert_allclose(lhs, cutoff_competition(p, kappa, b, r), rtol=0, atol=1e-12)


def test_inflation_from_sources_trivial():
    z = SourceGrid((0, 0, 0), (1, 1, 1), np.zeros((3, 3, 3)))
    x = np.array([5.0, 0.0, 0.0])
    assert inflation_from_sources(z, 0.0, x) == 0.0
    v = np.array([0.1, -0.2, 0.3])
    np.testing.assert_array_equal(inflation_from_sources(z.with_values(np.zeros((3, 3, 3, 3))), v, x), -v)


def test_inflation_point_source_falloff():
    g = point_source()
    for rho in (0.6, 1.2):
        x = np.array([0.0, rho, 0.0])
        got = inflation_from_sources(g, lambda p: 0.25, x)
        assert got == pytest.approx(1.0 / (4 * math.pi * rho) - 0.25, abs=1e-2 / (4 * math.pi * rho))


def test_choice_from_inflation_sign():
    g = point_source()
    assert choice_from_inflation(g.with_values(np.zeros(g.shape)), [1.0, 0, 0]) == 0.0
    val = choice_from_inflation(g, [0.8, 0.0, 0.0])
    assert val < 0
    assert val == pytest.approx(-1.0 / (4 * math.pi * 0.8), rel=1e-2)


def test_inflation_selfconsistent_cases():
    k = smooth_grid(n=6, seed=4)
    x = np.array([0.3, 0.3, 3.0])
    zero = k.with_values(np.zeros(k.shape))
    assert inflation_selfconsistent(zero, zero, x) == 0.0
    assert inflation_selfconsistent(k, zero, x) == newtonian_potential(k, x)
    other = SourceGrid((0, 0, 0), (0.2, 0.2, 0.2), np.zeros((6, 6, 6)))
    with pytest.raises(GridMismatch):
        inflation_selfconsistent(k, other, x)


def test_composition_matches_selfconsistent_form():
    # pi_t(x, t) = g(x) sin t, so the inflation acceleration is g(x) cos t and the
    # choice rate follows from differentiating C_h = -N[pi_t] in time
    n, h = 14, 0.15
    origin = (-(n // 2) * h,) * 3

    def g(p):
        return np.exp(-np.sum(p**2, axis=-1) / 0.3)

    base = SourceGrid.from_function(g, origin, (h, h, h), (n, n, n))
    capital = SourceGrid.from_function(lambda p: np.exp(-np.sum((p - 0.2) ** 2, axis=-1)), origin, (h, h, h), (n, n, n))
    x = np.array([[0.1, -0.2, 0.05], [1.4, 0.3, -0.6], [2.5, 2.5, 0.0]])
    t, dt = 0.7, 1e-3

    def choice_at(tt):
        return choice_from_inflation(base.with_values(base.values * math.sin(tt)), x)

    choice_rate = (choice_at(t + dt) - choice_at(t - dt)) / (2 * dt)
    composed = inflation_from_sources(capital, lambda p: choice_rate, x)
    direct = inflation_selfconsistent(capital, base.with_values(base.values * math.cos(t)), x)
    np.testing.assert_allclose(composed, direct, rtol=1e-3)
