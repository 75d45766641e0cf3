import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.optimize import minimize

from aucteq import bounds
from aucteq.cdf import min_envelope
from aucteq.errors import ParameterError

E = math.e


def envelope_welfare_oracle(alpha, beta, v):
    """alpha + beta + integral of (1 - min envelope) by quadrature."""
    top = max(v - beta, 1 - alpha)
    theta = (v * alpha - beta) / (alpha - beta) if beta < v * alpha else 0.0

    def F(x):
        terms = [alpha / (1 - x)] + ([beta / (v - x)] if x < v else [])
        return min(1.0, *terms)

    pts = sorted({0.0, min(max(theta, 0.0), top), top})
    return alpha + beta + sum(quad(lambda x: 1 - F(x), a, b, epsabs=1e-13)[0] for a, b in zip(pts, pts[1:]))


def test_minimize_welfare_constants():
    r = bounds.minimize_welfare()
    assert r.value == pytest.approx(0.813559, abs=1e-5)
    assert r.params["alpha"] == pytest.approx(0.274322, abs=1e-4)
    assert r.residual <= 1e-10
    # Frozen at full precision for regression.
    assert r.value == pytest.approx(0.8135593768592570, abs=1e-12)
    assert r.params["beta"] == pytest.approx(0.1352959290721755, abs=1e-12)


def test_minimizer_agrees_with_numerical_search():
    def w(p):
        a = float(np.clip(p[0], 0.05, 0.6))
        b = float(np.clip(p[1], 1e-6, a * (1 - a) - 1e-9))
        return bounds.welfare_lb(a, b, 1 - a)

    res = minimize(w, x0=[0.3, 0.1], method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-13})
    r = bounds.minimize_welfare()
    assert res.fun == pytest.approx(r.value, abs=1e-8)
    assert res.x[0] == pytest.approx(r.params["alpha"], abs=1e-4)


def test_case1_candidate():
    a = bounds.case1_alpha()
    assert a == pytest.approx(0.203, abs=1e-3)
    assert bounds.case1_welfare(a) == pytest.approx(0.838, abs=1e-3)
    assert abs(bounds.case1_root_equation(a)) < 1e-10


@pytest.mark.parametrize("alpha,beta,v", [
    (0.274322, 0.135296, 0.725678),
    (0.3, 0.05, 0.6),
    (0.5, 0.3, 0.7),
    (0.4, 0.3, 0.5),
    (0.2, 0.16, 0.8),
])
def test_welfare_lb_matches_quadrature(alpha, beta, v):
    assert bounds.welfare_lb(alpha, beta, v) == pytest.approx(envelope_welfare_oracle(alpha, beta, v), abs=1e-9)


def test_welfare_lb_matches_envelope_mean():
    a, b, v = 0.3, 0.05, 0.6
    assert bounds.welfare_lb(a, b, v) == pytest.approx(a + b + min_envelope(a, b, v).expected_value(), abs=1e-12)


@given(st.floats(0.01, 1.0), st.floats(0.01, 0.99))
@settings(max_examples=100)
def test_case_boundary_is_continuous(alpha, v):
    beta = v * alpha
    assert abs(bounds.welfare_lb_case1(alpha, beta) - bounds.welfare_lb_case2(alpha, beta, v)) <= 1e-9


def test_optimum_agrees_with_welfare_lb():
    r = bounds.minimize_welfare()
    a = r.params["alpha"]
    assert bounds.welfare_lb(a, bounds.beta_of_alpha(a), 1 - a) == pytest.approx(r.value, abs=1e-9)


@pytest.mark.parametrize("alpha", [0.1, 0.5, 0.9])
def test_welfare_lb_is_one_at_zero_beta(alpha):
    assert bounds.welfare_lb(alpha, 0.0, 1 - alpha) == pytest.approx(1.0, abs=1e-12)


def test_welfare_lb_increasing_in_v():
    rng = np.random.default_rng(5)
    h = 1e-7
    checked = 0
    while checked < 100:
        a, v = rng.uniform(0.01, 1.0), rng.uniform(0.02, 0.98)
        b = rng.uniform(0.0, v * a)
        if not 1e-6 < b < v * a - 1e-6:
            continue
        d = (bounds.welfare_lb(a, b, v + h) - bounds.welfare_lb(a, b, v - h)) / (2 * h)
        assert d >= -1e-6
        checked += 1


def test_welfare_lb_domain():
    with pytest.raises(ParameterError):
        bounds.welfare_lb(0.0, 0.1, 0.5)
    with pytest.raises(ParameterError):
        bounds.welfare_lb_case2(0.5, 0.1, 1.0)


def test_beta_of_alpha_is_stationary():
    a = 0.3
    b = bounds.beta_of_alpha(a)
    h = 1e-6
    deriv = (bounds.welfare_lb(a, b + h, 1 - a) - bounds.welfare_lb(a, b - h, 1 - a)) / (2 * h)
    assert abs(deriv) < 1e-6
    assert bounds.welfare_lb(a, b, 1 - a) == pytest.approx(bounds.welfare_case2a(a), abs=1e-12)


def test_u_bounds_at_optimum():
    a = bounds.minimize_welfare().params["alpha"]
    ub = bounds.u_bounds(a)
    assert ub.in_certified_range
    assert ub.u_min == pytest.approx(0.10594, abs=1e-5)
    assert ub.u_max == pytest.approx(0.29642, abs=1e-5)


@pytest.mark.parametrize("alpha", np.round(np.arange(0.27, 0.28005, 1e-4), 6))
def test_u_bounds_bracket_alpha(alpha):
    ub = bounds.u_bounds(alpha)
    assert ub.u_min <= alpha <= ub.u_max
    assert ub.u_min <= 0.12 and ub.u_max >= 0.285


def test_u_bounds_match_quantile_oracle():
    a = 0.275
    p = bounds.WorstWelfareParams.from_alpha(a)
    cdf = min_envelope(p.alpha, p.beta, p.v)
    low = p.q - quad(cdf.inverse, 0.0, p.q, limit=200)[0]
    high = p.q - quad(cdf.inverse, 1 - p.q, 1.0, limit=200)[0]
    ub = bounds.u_bounds(a)
    assert ub.u_max == pytest.approx(low, abs=1e-8)
    assert ub.u_min == pytest.approx(high, abs=1e-8)


def test_crossover_value():
    a = bounds.minimize_welfare().params["alpha"]
    assert bounds.crossover(a) == pytest.approx((E - 1) * (1 - a) / E)


def test_revenue_floor_and_symmetric():
    assert bounds.revenue_floor() == pytest.approx(0.2642411176571153, abs=1e-15)
    assert bounds.symmetric_revenue_bound(2, 1.0) == pytest.approx(bounds.revenue_floor())
    assert bounds.symmetric_revenue_bound(3, 2.0) == pytest.approx(2 * (1 - 3 * math.exp(-2)))
    assert bounds.symmetric_alpha(2, 1.0) == pytest.approx(1 / E)
    with pytest.raises(ParameterError):
        bounds.symmetric_revenue_bound(1, 1.0)


def test_symmetric_bound_increases_to_value():
    vals = [bounds.symmetric_revenue_bound(n, 1.5) for n in range(2, 51)]
    # Strict until the gap to v drops below double precision.
    assert all(x < y or y == 1.5 for x, y in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(1.5, abs=1e-15)


def test_revenue_lb_rhs_matches_quadrature():
    a, v = 0.5, 3.0
    c = (1 - 1 / E) * (v - 1) + a
    oracle = quad(lambda x: 1 - c / (v - x), 0, v - c)[0]
    assert bounds.revenue_lb_rhs(a, v) == pytest.approx(oracle, abs=1e-10)


@given(st.floats(1 / E + 1e-9, 1.0), st.floats(1.0, 10.0))
@settings(max_examples=100)
def test_revenue_gap_margin_positive(alpha, v):
    assert bounds.revenue_gap_margin(alpha, v) > 0


@pytest.mark.parametrize("eps,expected", [(0.1, 3.24e6), (0.5, 5184.0), (0.3, 40000.0)])
def test_gap_threshold(eps, expected):
    assert bounds.gap_threshold(eps) == pytest.approx(expected, rel=1e-12)


def test_gap_threshold_domain():
    with pytest.raises(ParameterError):
        bounds.gap_threshold(0.0)
