import math

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st
from scipy import integrate, special

from app.exceptions import UTDomainError
from app.specfun.service import (
    INV_E,
    lambert_w_m1,
    scaled_upper_incomplete_gamma,
    upper_incomplete_gamma,
)


def _tail_by_quadrature(a, b):
    value, _ = integrate.quad(lambda t: t ** (a - 1.0) * math.exp(-t), b, np.inf, epsabs=0, epsrel=1e-12)
    return value


@pytest.mark.parametrize("a,b", [(0.5, 1.0), (2.0, 3.0), (5.5, 0.2), (1.0, 10.0)])
def test_positive_a_matches_gamma_times_q(a, b):
    expected = special.gamma(a) * special.gammaincc(a, b)
    assert upper_incomplete_gamma(a, b) == pytest.approx(expected, rel=1e-12)


def test_gamma_zero_is_exponential_integral():
    for b in (0.1, 1.0, 4.0):
        assert upper_incomplete_gamma(0.0, b) == pytest.approx(special.exp1(b), rel=1e-14)


@pytest.mark.parametrize("a", [-0.5, -1.0, -1.3, -2.0, -2.75, -4.5])
@pytest.mark.parametrize("b", [0.5, 1.0, 3.0])
def test_negative_a_matches_quadrature(a, b):
    assert upper_incomplete_gamma(a, b) == pytest.approx(_tail_by_quadrature(a, b), rel=1e-9)


def test_known_value_at_minus_one():
    # Gamma(-1, 1) = e^-1 - E1(1)
    assert upper_incomplete_gamma(-1.0, 1.0) == pytest.approx(math.exp(-1.0) - special.exp1(1.0), rel=1e-13)


def test_recurrence_residual_on_grid():
    for a in np.arange(-5.75, 3.0, 0.5):
        for b in (0.25, 1.0, 2.5, 7.0):
            lhs = upper_incomplete_gamma(a, b)
            rhs = (upper_incomplete_gamma(a + 1.0, b) - b ** a * math.exp(-b)) / a
            assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


def test_continuous_just_below_negative_integer():
    b = 1.5
    at_int = upper_incomplete_gamma(-2.0, b)
    near = upper_incomplete_gamma(-2.0 - 1e-9, b)
    assert near == pytest.approx(at_int, rel=1e-6)


@pytest.mark.parametrize("a,b", [(1.0, 0.0), (1.0, -1.0), (math.nan, 1.0), (1.0, math.inf)])
def test_incomplete_gamma_rejects_bad_arguments(a, b):
    with pytest.raises(UTDomainError):
        upper_incomplete_gamma(a, b)


def test_scaled_gamma_consistent_across_switch():
    a = 3.2
    below = scaled_upper_incomplete_gamma(a, 699.0)
    above = scaled_upper_incomplete_gamma(a, 701.0)
    # e^b Gamma(a, b) ~ b^(a-1) for large b
    assert below / 699.0 ** (a - 1) == pytest.approx(above / 701.0 ** (a - 1), rel=1e-4)
    assert math.isfinite(scaled_upper_incomplete_gamma(a, 5000.0))


@pytest.mark.parametrize("a,b,expected", [
    (1.0, 1.0, 0.36787944),
    (0.5, 1.0, 0.27880559),
    (-0.5, 1.0, 0.17814772),
])
def test_incomplete_gamma_reference_values(a, b, expected):
    assert upper_incomplete_gamma(a, b) == pytest.approx(expected, abs=5e-9)


@pytest.mark.parametrize("a", [-5.5, -2.3, -0.5, 0.7, 3.2])
@pytest.mark.parametrize("b", [0.1, 1.0, 5.0, 20.0])
def test_recurrence_residual_on_reference_grid(a, b):
    upper = upper_incomplete_gamma(a + 1.0, b)
    residual = upper - a * upper_incomplete_gamma(a, b) - b ** a * math.exp(-b)
    assert abs(residual) <= 1e-10 * (1.0 + abs(upper))


def _scaled_tail_by_quadrature(a, b):
    # e^b Gamma(a, b) = b^(a-1) * integral_0^inf (1 + s/b)^(a-1) e^-s ds
    value, _ = integrate.quad(
        lambda s: (1.0 + s / b) ** (a - 1.0) * math.exp(-s), 0.0, np.inf, epsabs=0, epsrel=1e-13, limit=200,
    )
    return b ** (a - 1.0) * value


@pytest.mark.parametrize("a,b", [
    (-5.5, 20.0), (-10.5, 100.0), (-20.5, 300.0), (-50.0, 20.0), (-0.5, 50.0), (3.2, 650.0),
])
def test_large_b_matches_quadrature(a, b):
    expected = _scaled_tail_by_quadrature(a, b)
    assert scaled_upper_incomplete_gamma(a, b) == pytest.approx(expected, rel=1e-11)
    value = upper_incomplete_gamma(a, b)
    assert value > 0.0
    assert value == pytest.approx(math.exp(-b) * expected, rel=1e-11)


def test_scaled_gamma_where_unscaled_underflows():
    # e^-700 * 700^-51 is below the smallest double
    assert scaled_upper_incomplete_gamma(-50.0, 700.0) == pytest.approx(_scaled_tail_by_quadrature(-50.0, 700.0), rel=1e-11)


@pytest.mark.parametrize("a", [-50.0, -20.5, -3.0, -0.5])
@pytest.mark.parametrize("b", [1e-3, 0.3, 0.999, 1.0, 30.0])
def test_negative_a_stays_positive(a, b):
    value = upper_incomplete_gamma(a, b)
    assert math.isfinite(value) and value > 0.0


def test_lambert_branch_point_and_range():
    assert lambert_w_m1(-INV_E) == -1.0
    w = lambert_w_m1(-0.1)
    assert w < -1.0
    assert w * math.exp(w) == pytest.approx(-0.1, abs=1e-15)


def test_lambert_residual_over_range():
    z = -np.logspace(-300, math.log10(INV_E) - 1e-9, 400)
    w = lambert_w_m1(z)
    assert w.shape == z.shape
    assert np.all(w <= -1.0)
    assert np.max(np.abs(w * np.exp(w) - z)) <= 1e-13


@pytest.mark.parametrize("z", [0.0, 0.5, -0.5, math.nan])
def test_lambert_rejects_outside_domain(z):
    with pytest.raises(UTDomainError):
        lambert_w_m1(z)


@hyp_settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-12, max_value=INV_E * (1 - 1e-12)))
def test_lambert_inverts_w_exp_w(x):
    z = -x
    w = lambert_w_m1(z)
    assert abs(w * math.exp(w) - z) <= 1e-13


@pytest.mark.parametrize("z,expected", [(-0.1, -3.57715207), (-0.18393972, -2.67834699)])
def test_lambert_reference_values(z, expected):
    assert lambert_w_m1(z) == pytest.approx(expected, abs=5e-9)


@pytest.mark.parametrize("offset", [1e-11, 1e-9, 1e-7, 1e-5, 5e-4, 2e-3])
def test_lambert_accurate_near_branch_point(offset):
    z = -INV_E + offset
    # distance actually represented by z; 1/e itself is rounded in INV_E
    eps = (z + INV_E) - 1.2428753672788363e-17
    w = lambert_w_m1(z)
    # leading terms of the expansion about -1/e
    q = 2.0 * math.e * eps
    approx = -1.0 - math.sqrt(q) - q / 3.0 - 11.0 / 72.0 * q ** 1.5
    assert w == pytest.approx(approx, abs=1e-11 + 0.1 * q ** 2)
    assert abs(w * math.exp(w) - z) <= 1e-13 * abs(z)


def test_lambert_relative_residual_near_branch():
    z = -INV_E + np.logspace(-16, -2, 300)
    w = lambert_w_m1(z)
    assert np.all(np.abs(w * np.exp(w) - z) <= 1e-13 * np.abs(z))


def test_lambert_monotone_across_series_switch():
    z = -INV_E + np.linspace(5e-4, 2e-3, 201)
    w = lambert_w_m1(z)
    assert np.all(np.diff(w) < 0.0)
