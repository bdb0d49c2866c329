import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from marketfield.errors import ZeroUnemployment
from marketfield.kernels import SourceGrid, newtonian_potential
from marketfield.macro import PhillipsSample, capital_rate, phillips_curve, region_source

H = 0.1
ORIGIN = (-0.5, -0.5, -0.5)
X = np.array([0.05, 0.05, 1.5])


def ball(radius=0.3, n=11, centre=(0.0, 0.0, 0.0)):
    def f(p):
        return (np.sum((p - np.asarray(centre)) ** 2, axis=-1) <= radius**2).astype(float)

    return SourceGrid.from_function(f, ORIGIN, (H, H, H), (n, n, n))


def test_capital_rate_values():
    assert capital_rate(1.0) == 1.0
    assert capital_rate(0.04) == 25.0
    assert capital_rate(1e300) < 1e-299
    np.testing.assert_allclose(capital_rate(np.array([0.5, 0.25])), [2.0, 4.0])


@pytest.mark.parametrize("u", [0.0, -0.1, float("nan")])
def test_capital_rate_rejects_nonpositive(u):
    with pytest.raises(ZeroUnemployment):
        capital_rate(u)
    with pytest.raises(ZeroUnemployment):
        PhillipsSample(u, 1.0, 0.0)


def test_region_source_uniform_on_support():
    region = ball()
    src = region_source(region, 7.0)
    assert set(np.unique(src.values)) == {0.0, 7.0}
    np.testing.assert_array_equal(src.values != 0, region.values != 0)


def test_phillips_curve_monotone_decreasing():
    u = np.round(np.arange(0.02, 0.2001, 0.02), 10)
    expectations = ball().with_values(0.5 * ball().values)
    pi = np.array([s.inflation for s in phillips_curve(u, ball(), expectations, X)])
    assert np.all(np.diff(pi) < 0)
    assert all(s.capital_rate == pytest.approx(1 / s.u) for s in phillips_curve(u, ball(), expectations, X))


def test_halving_u_doubles_capital_contribution():
    (a,), (b,) = phillips_curve([0.1], ball(), None, X), phillips_curve([0.05], ball(), None, X)
    assert b.inflation == pytest.approx(2 * a.inflation, rel=1e-12)


def test_large_u_gives_vanishing_inflation():
    (s,) = phillips_curve([1e12], ball(), None, X)
    assert 0 < s.inflation < 1e-12


def test_expectations_raise_inflation():
    base = phillips_curve([0.1], ball(), None, X)[0].inflation
    hot = phillips_curve([0.1], ball(), ball(), X)[0].inflation
    assert hot > base
    assert hot - base == pytest.approx(newtonian_potential(ball(), X), rel=1e-12)


def test_vector_region_acts_as_support_mask():
    region = ball()
    vec = region.with_values(np.stack([region.values, 0 * region.values, -region.values], axis=-1))
    (s,) = phillips_curve([0.5], vec, None, X)
    assert s.inflation == phillips_curve([0.5], region, None, X)[0].inflation


@settings(max_examples=25, deadline=None)
@given(st.floats(0.01, 5.0), st.floats(0.1, 0.4))
def test_disjoint_regions_add(u, shift):
    left, right = ball(0.15, centre=(-shift, 0, 0)), ball(0.15, centre=(shift, 0, 0.2))
    if np.any((left.values != 0) & (right.values != 0)):
        return
    union = left.with_values(left.values + right.values)
    total = phillips_curve([u], union, None, X)[0].inflation
    parts = sum(phillips_curve([u], g, None, X)[0].inflation for g in (left, right))
    assert total == pytest.approx(parts, rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 10.0))
def test_contribution_scales_linearly_with_source(c):
    region = ball()
    base = phillips_curve([0.2], region, None, X)[0].inflation
    assert phillips_curve([0.2 / c], region, None, X)[0].inflation == pytest.approx(c * base, rel=1e-10)
