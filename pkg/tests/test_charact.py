import math

import numpy as np
import pytest
from scipy import special

from app.exceptions import UTDomainError
from app.dist.service import UnitTeissier, cdf, pdf, sf
from app.moments.service import raw_moment
from app.charact.service import g_fn, g_times_pdf, h_fn, h_times_pdf, verify_characterization
from app.numerics.service import integrate

GRID = np.linspace(0.02, 0.98, 50)


def test_lower_product_at_half(ut1):
    direct = integrate(lambda t: t * pdf(ut1, t), 0.0, 0.5)
    assert g_times_pdf(ut1, 0.5) == pytest.approx(direct, abs=1e-10)
    # e [Gamma(1, 2) - Gamma(0, 2)] = e (e^-2 - E1(2))
    assert g_times_pdf(ut1, 0.5) == pytest.approx(0.2349540715, abs=1e-9)
    assert g_times_pdf(ut1, 0.5) == pytest.approx(math.e * (math.exp(-2.0) - special.exp1(2.0)), abs=1e-12)


def test_upper_product_at_half(ut1):
    direct = integrate(lambda t: t * pdf(ut1, t), 0.5, 1.0)
    assert h_times_pdf(ut1, 0.5) == pytest.approx(direct, abs=1e-10)
    assert h_times_pdf(ut1, 0.5) == pytest.approx(raw_moment(ut1, 1) - 0.2349540715, abs=1e-9)


@pytest.mark.parametrize("theta", [0.3, 1.0, 2.5])
@pytest.mark.parametrize("x", [0.05, 0.4, 0.8, 0.97])
def test_upper_product_matches_quadrature(theta, x):
    d = UnitTeissier(theta)
    direct = integrate(lambda t: t * pdf(d, t), x, 1.0)
    assert h_times_pdf(d, x) == pytest.approx(direct, abs=1e-9)


def test_g_stays_positive_deep_in_the_lower_tail():
    value = g_fn(UnitTeissier(0.1), 1e-25)
    assert math.isfinite(value)
    assert value > 0.0


@pytest.mark.parametrize("theta", [0.5, 1.0, 2.0])
def test_verification_gap_is_small(theta):
    checks = verify_characterization(UnitTeissier(theta), GRID)
    assert len(checks) == 2 * len(GRID)
    assert {c.side for c in checks} == {"lower", "upper"}
    assert max(c.abs_gap for c in checks) <= 1e-7
    for c in checks:
        assert c.abs_gap == pytest.approx(abs(c.lhs - c.rhs))


@pytest.mark.parametrize("theta", [0.5, 1.0, 2.0, 4.0])
def test_total_expectation_decomposition(theta):
    d = UnitTeissier(theta)
    mean = raw_moment(d, 1)
    for x in GRID:
        assert abs(g_times_pdf(d, x) + h_times_pdf(d, x) - mean) <= 1e-9


def test_perturbed_g_is_detected(ut1):
    checks = verify_characterization(ut1, GRID, g_func=lambda d, x: 1.01 * g_fn(d, x))
    lower = [c for c in checks if c.side == "lower"]
    assert max(c.abs_gap for c in lower) > 1e-3


@pytest.mark.parametrize("theta", [0.5, 1.0, 2.0, 4.0])
def test_g_and_h_are_positive(theta):
    d = UnitTeissier(theta)
    for x in np.linspace(0.05, 0.95, 19):
        assert g_fn(d, x) > 0
        assert h_fn(d, x) > 0


@pytest.mark.parametrize("x", [0.1, 0.3, 0.6, 0.9])
def test_conditional_means_bracket_the_cut(ut1, x):
    below = g_fn(ut1, x) * pdf(ut1, x) / cdf(ut1, x)
    above = h_fn(ut1, x) * pdf(ut1, x) / sf(ut1, x)
    assert 0.0 < below < x
    assert x < above < 1.0


def test_limits_recover_the_mean(ut1):
    mean = raw_moment(ut1, 1)
    assert g_times_pdf(ut1, 1.0 - 1e-9) == pytest.approx(mean, abs=1e-6)
    assert h_times_pdf(ut1, 1e-4) == pytest.approx(mean, abs=1e-9)


def test_deep_lower_tail_has_no_mass():
    d = UnitTeissier(4.0)
    assert g_times_pdf(d, 1e-3) == 0.0
    assert math.isinf(h_fn(d, 1e-3))


def test_grid_outside_open_range_is_rejected(ut1):
    with pytest.raises(UTDomainError):
        verify_characterization(ut1, [0.005, 0.5])
    with pytest.raises(UTDomainError):
        g_fn(ut1, 1.0)
