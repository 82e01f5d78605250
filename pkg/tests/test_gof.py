import math

import numpy as np
import pytest
from scipy import stats

from conftest import RISK73_EDF, RISK73_FIT, RISK73_PLAIN_EDF
from app.exceptions import UTDomainError
from app.gof.service import (
    GofReport,
    anderson_darling,
    cramer_von_mises,
    fitted_curves,
    gof_report,
    histogram_density,
    kolmogorov_smirnov,
    ks_pvalue,
    normal_scores_statistics,
    pp_frame,
    pp_points,
    fit_summary_row,
)

THETA_HAT = 0.3493


@pytest.fixture(scope="module")
def risk73_report(risk73_sample):
    return gof_report(risk73_sample, THETA_HAT)


@pytest.mark.parametrize("field", ["neg_loglik", "aic", "caic", "bic", "hqic", "ks", "ks_pvalue"])
def test_risk73_report_matches_published_row(risk73_report, field):
    value, tol = RISK73_FIT[field]
    assert getattr(risk73_report, field) == pytest.approx(value, abs=tol)


@pytest.mark.parametrize("field", sorted(RISK73_EDF))
def test_risk73_edf_statistics(risk73_report, field):
    assert getattr(risk73_report, field) == pytest.approx(RISK73_EDF[field], rel=0.02)


@pytest.mark.parametrize("field", sorted(RISK73_PLAIN_EDF))
def test_risk73_plain_edf_statistics(risk73_report, field):
    assert getattr(risk73_report, field) == pytest.approx(RISK73_PLAIN_EDF[field], rel=1e-3)


def test_normal_scores_statistics_ignore_location_and_scale():
    u = np.array([0.03, 0.11, 0.2, 0.34, 0.41, 0.58, 0.66, 0.79, 0.9, 0.97])
    w_star, a_star, clamped = normal_scores_statistics(u)
    shifted = stats.norm.cdf(0.7 + 2.5 * stats.norm.ppf(u))
    w_moved, a_moved, _ = normal_scores_statistics(shifted)
    assert not clamped
    assert w_moved == pytest.approx(w_star, rel=1e-6)
    assert a_moved == pytest.approx(a_star, rel=1e-6)


def test_normal_scores_small_sample_factors():
    u = np.array([0.1, 0.25, 0.5, 0.6, 0.95])
    n = u.size
    y = stats.norm.ppf(u)
    v = stats.norm.cdf((y - y.mean()) / y.std(ddof=1))
    w_star, a_star, _ = normal_scores_statistics(u)
    assert w_star == pytest.approx(cramer_von_mises(v) * (1 + 0.5 / n))
    assert a_star == pytest.approx(anderson_darling(v)[0] * (1 + 0.75 / n + 2.25 / n ** 2))


def test_normal_scores_need_spread():
    with pytest.raises(UTDomainError):
        normal_scores_statistics([0.4, 0.4, 0.4])


def test_information_criteria_relations(risk73_report):
    r = risk73_report
    n, k = r.n, r.k_params
    assert n == 73 and k == 1
    assert r.aic == pytest.approx(2 * k + 2 * r.neg_loglik)
    assert r.caic - r.aic == pytest.approx(2 * k * (k + 1) / (n - k - 1))
    assert r.bic == pytest.approx(k * math.log(n) + 2 * r.neg_loglik)
    assert r.hqic == pytest.approx(2 * k * math.log(math.log(n)) + 2 * r.neg_loglik)
    assert not r.clamped


def test_report_json_round_trip_and_text(risk73_report):
    assert GofReport.model_validate_json(risk73_report.model_dump_json()) == risk73_report
    text = risk73_report.to_text()
    assert "AIC" in text and "-175.07" in text
    assert "W*" in text and "0.222" in text


def test_edf_statistics_for_perfect_fit():
    n = 10
    u = (np.arange(1, n + 1) - 0.5) / n
    assert cramer_von_mises(u) == pytest.approx(1.0 / (12 * n))
    assert kolmogorov_smirnov(u) == pytest.approx(0.5 / n)


def test_anderson_darling_clamps_extreme_probabilities():
    value, clamped = anderson_darling([0.0, 0.5, 1.0])
    assert clamped
    assert math.isfinite(value)
    _, clean = anderson_darling([0.2, 0.5, 0.8])
    assert not clean


def test_edf_input_validation():
    with pytest.raises(UTDomainError):
        cramer_von_mises([])
    with pytest.raises(UTDomainError):
        kolmogorov_smirnov([0.2, 1.5])


def test_ks_pvalue_monotone():
    assert ks_pvalue(0.05, 73) > ks_pvalue(0.2, 73)
    assert 0.0 < ks_pvalue(0.1033, 73) < 1.0


def test_report_needs_two_observations():
    with pytest.raises(UTDomainError):
        gof_report([0.3], 1.0)


def test_pp_points(risk73_sample):
    points = pp_points(risk73_sample, THETA_HAT)
    assert len(points) == 73
    assert points[0][0] == pytest.approx(0.5 / 73)
    theoretical = [t for _, t in points]
    assert theoretical == sorted(theoretical)
    assert list(pp_frame(risk73_sample, THETA_HAT).columns) == ["empirical", "theoretical"]


def test_fitted_curves_frame(risk73_sample):
    df = fitted_curves(risk73_sample, THETA_HAT, points=50)
    assert list(df.columns) == ["x", "pdf", "cdf", "sf", "empirical_cdf"]
    assert len(df) == 50
    assert np.allclose(df["cdf"] + df["sf"], 1.0, atol=1e-12)
    assert df["empirical_cdf"].is_monotonic_increasing
    with pytest.raises(UTDomainError):
        fitted_curves(risk73_sample, THETA_HAT, points=1)


def test_histogram_density_integrates_to_one(risk73_sample):
    df = histogram_density(risk73_sample, bins=10)
    widths = df["bin_right"] - df["bin_left"]
    assert float((df["density"] * widths).sum()) == pytest.approx(1.0)


def test_fit_summary_row(risk73_sample):
    row = fit_summary_row(risk73_sample).iloc[0]
    assert row["model"] == "UT"
    assert row["theta_hat"] == pytest.approx(RISK73_FIT["theta_hat"][0], abs=RISK73_FIT["theta_hat"][1])
    assert row["std_error"] == pytest.approx(RISK73_FIT["std_error"][0], abs=RISK73_FIT["std_error"][1])
    assert row["aic"] == pytest.approx(RISK73_FIT["aic"][0], abs=0.05)
    assert row["w_star"] == pytest.approx(RISK73_EDF["w_star"], rel=0.02)
    assert row["a_star"] == pytest.approx(RISK73_EDF["a_star"], rel=0.02)
