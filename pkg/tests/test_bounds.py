import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from surfverify.bounds import (OdeCoefficients, cp_type1, cp_type2, cp_type2_nodes, gronwall,
                               gronwall_nodes, ode_oracle, restarted_cp_type2_nodes)

K = 7**7 / 4


def uniform(n=100, t=1.0, **kw):
    return OdeCoefficients.uniform(n, t / n, **kw)


# --- gronwall ----------------------------------------------------------------

@pytest.mark.parametrize("t", [0.3, 1.0, 2.5])
def test_gronwall_constant_forcing(t):
    c = uniform(50, 3.0, f_rate=0.7)
    assert gronwall(1.5, c, t) == pytest.approx(1.5 + 0.7 * t, rel=1e-12)


@pytest.mark.parametrize("alpha", [-0.25, 0.8, -3.0])
def test_gronwall_linear_closed_form(alpha):
    c = uniform(64, 2.0, a=alpha, f_rate=0.4)
    for t in (0.25, 1.0, 1.3, 2.0):
        expect = 0.3 * math.exp(alpha * t) + 0.4 * math.expm1(alpha * t) / alpha
        assert gronwall(0.3, c, t) == pytest.approx(expect, rel=1e-12)


def test_gronwall_zero():
    c = OdeCoefficients(np.linspace(0, 1, 11), np.linspace(-2, 2, 10), 0.0, 0.0)
    assert np.all(gronwall_nodes(0.0, c) == 0)


def test_gronwall_variable_coefficients():
    # a = -1 on [0,1], a = +2 on [1,2]; f density 1 then 0
    c = OdeCoefficients([0.0, 1.0, 2.0], [-1.0, 2.0], 0.0, [1.0, 0.0])
    x1 = 2 * math.exp(-1) + (1 - math.exp(-1))
    assert gronwall(2.0, c, 1.0) == pytest.approx(x1, rel=1e-14)
    assert gronwall(2.0, c, 2.0) == pytest.approx(x1 * math.exp(2), rel=1e-14)
    # partial interval: half of the density-1 forcing
    assert gronwall(2.0, c, 0.5) == pytest.approx(2 * math.exp(-0.5) + (1 - math.exp(-0.5)),
                                                  rel=1e-14)


def test_time_outside_grid():
    c = uniform(10, 1.0)
    for t in (-0.1, 1.5):
        with pytest.raises(ValueError):
            gronwall(1.0, c, t)
        with pytest.raises(ValueError):
            cp_type2(1.0, c, t)
    assert gronwall(1.0, c, 0.0) == 1.0


def test_coefficient_validation():
    with pytest.raises(ValueError):
        OdeCoefficients([0.0, 1.0], 0.0, -1.0, 0.0)
    with pytest.raises(ValueError):
        OdeCoefficients([0.0, 1.0], 0.0, 0.0, -1.0)
    with pytest.raises(ValueError):
        OdeCoefficients([0.0, 1.0, 1.0], 0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        OdeCoefficients([0.0, 1.0], 0.0, 0.0, 0.0, p=1.0)


# --- cp_type1 ------------------------------------------------------------------

@pytest.mark.parametrize("t", [0.0, 0.1, 0.5, 0.9, 0.999])
def test_cp1_quadratic(t):
    assert cp_type1(1.0, t, 0.0, 2.0) == pytest.approx(1 / (1 - t), rel=1e-12)


@pytest.mark.parametrize("t", [1.0, 1.5])
def test_cp1_quadratic_blowup(t):
    assert cp_type1(1.0, t, 0.0, 2.0) == math.inf


def test_cp1_no_superlinear_term():
    for p in (2.0, 5.0, 7.5):
        assert cp_type1(0.3, 0.0, 0.2, p) == pytest.approx(0.5, rel=1e-15)


def test_cp1_evaluated_example():
    assert cp_type1(0.5, 0.1, 0.0, 5.0) == pytest.approx(0.5 * 0.975**-0.25, rel=1e-12)
    assert cp_type1(0.5, 0.1, 0.0, 5.0) == pytest.approx(0.503175, abs=5e-7)


@pytest.mark.parametrize("x0, c, p", [(1.0, 1.0, 2.0), (0.5, 4.0, 5.0), (2.0, 0.125, 3.0)])
def test_cp1_blowup_time_exact(x0, c, p):
    t_blow = 1.0 / ((p - 1) * c * x0 ** (p - 1))
    assert t_blow == 1.0
    assert cp_type1(x0, c * t_blow, 0.0, p) == math.inf
    assert cp_type1(x0, c * 1.0000000001, 0.0, p) == math.inf
    assert math.isfinite(cp_type1(x0, c * (1 - 1e-12), 0.0, p))


# --- cp_type2 ------------------------------------------------------------------

def test_cp2_reference_value():
    c = uniform(1000, 1.0, a=-0.25, b=K)
    val = cp_type2(0.01, c, 1.0)
    # independent assembly: A(1) = -1/4, int b e^{4A} = K (1 - e^{-1})
    expect = math.exp(-0.25) * 0.01 * (1 - 4 * 0.01**4 * K * (1 - math.exp(-1))) ** -0.25
    assert val == pytest.approx(expect, rel=1e-12)
    assert val == pytest.approx(7.7982e-3, rel=1e-4)


@pytest.mark.parametrize("a, b, x0", [(-0.25, K, 0.01), (0.3, 2.0, 0.4), (-1.0, 10.0, 0.5)])
def test_cp2_constant_coefficient_closed_form(a, b, x0):
    c = uniform(37, 1.0, a=a, b=b)
    for t in np.linspace(0.1, 1.0, 7):
        q = 4.0
        inner = 1 - q * x0**q * b * math.expm1(q * a * t) / (q * a)
        expect = math.exp(a * t) * x0 * inner ** (-1 / q) if inner > 0 else math.inf
        assert cp_type2(x0, c, t) == pytest.approx(expect, rel=1e-12)


def test_cp2_zero_without_forcing():
    c = OdeCoefficients(np.linspace(0, 1, 11), np.linspace(-1, 1, 10), np.linspace(0, 5, 10), 0.0)
    assert np.all(cp_type2_nodes(0.0, c) == 0)


def test_cp2_blowup_stays_infinite():
    c = uniform(200, 2.0, b=1.0, p=2.0)
    vals = cp_type2_nodes(1.0, c)
    bad = np.flatnonzero(np.isinf(vals))
    assert bad.size and np.all(np.isinf(vals[bad[0]:]))
    assert c.grid[bad[0]] == pytest.approx(1.0, abs=c.widths[0])


def test_cp2_matches_cp1_without_linear_term():
    c = uniform(10, 0.5, b=3.0, f_rate=0.2)
    assert cp_type2(0.4, c, 0.5) == pytest.approx(cp_type1(0.4, 1.5, 0.1, 5.0), rel=1e-12)


def test_gronwall_is_limit_of_cp2():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = 30
        a = rng.uniform(-1, 1, n)
        f = rng.uniform(0, 0.1, n)
        x0 = rng.uniform(0, 1)
        grid = np.cumsum(np.concatenate(([0.0], rng.uniform(0.01, 0.1, n))))
        g = gronwall_nodes(x0, OdeCoefficients(grid, a, 0.0, f))
        c_small = cp_type2_nodes(x0, OdeCoefficients(grid, a, 1e-12, f))
        c_zero = cp_type2_nodes(x0, OdeCoefficients(grid, a, 0.0, f))
        np.testing.assert_allclose(c_small, g, rtol=1e-6)
        np.testing.assert_allclose(c_zero, g, rtol=1e-13)


@st.composite
def coefficient_sets(draw, n=8):
    floats = lambda lo, hi: st.lists(st.floats(lo, hi), min_size=n, max_size=n)
    return (np.array(draw(floats(-1, 1))), np.array(draw(floats(0, 5))),
            np.array(draw(floats(0, 0.05))), draw(st.floats(0, 0.3)))


@settings(max_examples=100, deadline=None)
@given(coefficient_sets(), st.floats(0, 0.2), st.floats(0, 0.05), st.floats(0, 2))
def test_cp2_monotone(cs, dx, df, db):
    a, b, f, x0 = cs
    grid = np.linspace(0, 0.5, len(a) + 1)
    base = cp_type2_nodes(x0, OdeCoefficients(grid, a, b, f))
    for bigger in (cp_type2_nodes(x0 + dx, OdeCoefficients(grid, a, b, f)),
                   cp_type2_nodes(x0, OdeCoefficients(grid, a, b, f + df)),
                   cp_type2_nodes(x0, OdeCoefficients(grid, a, b + db, f))):
        finite = np.isfinite(bigger)
        assert np.all(bigger[finite] >= base[finite] * (1 - 1e-12))
        assert np.all(np.isinf(bigger[~np.isfinite(base)]))


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(2, 8))
def test_cp1_monotone(x0, c, e, d, p):
    base = cp_type1(x0, c, e, p)
    for bigger in (cp_type1(x0 + d, c, e, p), cp_type1(x0, c + d, e, p), cp_type1(x0, c, e + d, p)):
        assert bigger >= base * (1 - 1e-12)


def test_restarted_single_cell_is_cp2():
    rng = np.random.default_rng(11)
    a, b, f = rng.uniform(-1, 1, 40), rng.uniform(0, 3, 40), rng.uniform(0, 1e-3, 40)
    c = OdeCoefficients(np.arange(41) * 0.01, a, b, f)
    whole = restarted_cp_type2_nodes(0.05, a, b, f, 0.01, 5.0, 40)
    # widths differ in the last bit (diff of the grid vs h itself)
    np.testing.assert_allclose(whole, cp_type2_nodes(0.05, c), rtol=1e-14)
    with pytest.raises(ValueError):
        restarted_cp_type2_nodes(0.05, a, b, f, 0.01, 5.0, 0)


def test_restart_every_step_agrees_with_generic_path():
    rng = np.random.default_rng(5)
    a, b, f = rng.uniform(-1, 1, 30), rng.uniform(0, 3, 30), rng.uniform(0, 1e-3, 30)
    fast = restarted_cp_type2_nodes(0.05, a, b, f, 0.01, 5.0, 1)
    z = 0.05
    for i in range(30):
        z = cp_type2_nodes(z, OdeCoefficients([0.0, 0.01], a[i], b[i], f[i]))[-1]
        assert fast[i + 1] == pytest.approx(z, rel=1e-14)


# --- oracle ------------------------------------------------------------------

def test_oracle_quadratic():
    c = uniform(10, 0.5, b=1.0, p=2.0)
    o = ode_oracle(1.0, c)
    assert o.values[-1] == pytest.approx(2.0, abs=1e-8)
    assert math.isinf(o.valid_until)


def test_oracle_blowup():
    c = uniform(20, 2.0, b=1.0, p=2.0)
    o = ode_oracle(1.0, c)
    assert o.valid_until == pytest.approx(1.0, abs=1e-6)
    assert np.all(np.isinf(o.values[o.times > 1.0]))
    assert np.all(np.isfinite(o.values[o.times < 1.0]))


def test_oracle_forcing_only():
    rng = np.random.default_rng(2)
    f = rng.uniform(0, 1, 25)
    c = OdeCoefficients(np.linspace(0, 1, 26), 0.0, 0.0, f)
    np.testing.assert_allclose(ode_oracle(0.3, c).values, 0.3 + np.concatenate(([0], np.cumsum(f))),
                               rtol=1e-10)


def test_oracle_below_cp2_reference_example():
    c = uniform(100, 1.0, a=-0.25, b=K)
    o = ode_oracle(0.01, c)
    assert np.all(o.values <= cp_type2_nodes(0.01, c) + 1e-8)


def test_oracle_dominated_random():
    rng = np.random.default_rng(7)
    for _ in range(10):
        n = 20
        c = OdeCoefficients(np.linspace(0, 0.4, n + 1), rng.uniform(-1, 1, n),
                            rng.uniform(0, 50, n), rng.uniform(0, 0.02, n))
        x0 = rng.uniform(0, 0.3)
        bound = cp_type2_nodes(x0, c)
        o = ode_oracle(x0, c)
        finite = np.isfinite(bound)
        assert np.all(o.values[finite] <= bound[finite] + 1e-8)
