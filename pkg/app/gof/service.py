"""
Goodness of Fit
===============
Information criteria and EDF statistics (Cramer-von Mises W2, Anderson-Darling
A2, Kolmogorov-Smirnov) for a fitted UT model, plus the plot-ready exports
(pp points, fitted curves, histogram density).

W* and A* are the normal-scores versions reported in published model
comparisons: fitted probabilities are mapped through the standard normal
quantile, standardized, mapped back, and the two statistics are scaled by
(1 + 0.5/n) and (1 + 0.75/n + 2.25/n^2).
"""

import math
import logging
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel
from scipy import stats

from app.exceptions import UTDomainError
from app.dist.service import UnitTeissier, cdf, pdf, sf
from app.estimate.service import Method, as_sample, fit, mle_std_error, objective

logger = logging.getLogger(__name__)

# Probabilities are clamped into this range inside the A2 logarithms
PROB_FLOOR = 1e-300
PROB_CEIL = 1.0 - 1e-16
UT_PARAMS = 1


class GofReport(BaseModel):
    theta_hat: float
    n: int
    k_params: int = UT_PARAMS
    neg_loglik: float
    aic: float
    caic: float
    bic: float
    hqic: float
    w2: float
    a2: float
    w_star: float
    a_star: float
    ks: float
    ks_pvalue: float
    clamped: bool = False

    def to_text(self) -> str:
        """Aligned two-column table, 4 decimals as in the published fit tables."""
        rows = [
            ("theta_hat", self.theta_hat), ("-loglik", self.neg_loglik),
            ("AIC", self.aic), ("CAIC", self.caic), ("BIC", self.bic), ("HQIC", self.hqic),
            ("W2", self.w2), ("A2", self.a2), ("W*", self.w_star), ("A*", self.a_star),
            ("KS", self.ks), ("p-value", self.ks_pvalue),
        ]
        lines = [f"{'n':<10} {self.n:>12d}"]
        lines += [f"{name:<10} {value:>12.4f}" for name, value in rows]
        if self.clamped:
            lines.append("note: fitted probabilities were clamped inside the A2 and A* logarithms")
        return "\n".join(lines)


# ============================================================================
# EDF STATISTICS (on fitted probabilities u_i = F(x_(i)))
# ============================================================================

def _sorted_probabilities(u) -> np.ndarray:
    u = np.sort(np.asarray(u, dtype=float))
    if u.size == 0:
        raise UTDomainError("EDF statistics need at least one probability")
    if np.any((u < 0) | (u > 1)):
        raise UTDomainError("fitted probabilities must lie in [0, 1]")
    return u


def cramer_von_mises(u) -> float:
    """W2 = 1/(12n) + sum [u_i - (2i-1)/(2n)]^2"""
    u = _sorted_probabilities(u)
    n = u.size
    i = np.arange(1, n + 1)
    return float(1.0 / (12 * n) + np.sum((u - (2 * i - 1) / (2.0 * n)) ** 2))


def anderson_darling(u) -> Tuple[float, bool]:
    """A2 = -n - (1/n) sum (2i-1) [ln u_i + ln(1 - u_{n+1-i})]; also reports clamping."""
    u = _sorted_probabilities(u)
    n = u.size
    clipped = np.clip(u, PROB_FLOOR, PROB_CEIL)
    clamped = bool(np.any(clipped != u))
    i = np.arange(1, n + 1)
    total = np.sum((2 * i - 1) * (np.log(clipped) + np.log1p(-clipped[::-1])))
    return float(-n - total / n), clamped


def kolmogorov_smirnov(u) -> float:
    """max_i max(i/n - u_i, u_i - (i-1)/n)"""
    u = _sorted_probabilities(u)
    n = u.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - u), np.max(u - (i - 1) / n)))


def ks_pvalue(ks: float, n: int) -> float:
    """Asymptotic Kolmogorov tail P(K > sqrt(n) KS)."""
    return float(stats.kstwobign.sf(math.sqrt(n) * ks))


def normal_scores_statistics(u) -> Tuple[float, float, bool]:
    """
    (W*, A*, clamped): W2 and A2 on v_i = Phi((y_i - mean y) / s_y) with
    y_i = Phi^-1(u_i), s_y the n-1 standard deviation, then the
    small-sample factors.
    """
    u = _sorted_probabilities(u)
    n = u.size
    if n < 2:
        raise UTDomainError("normal-scores statistics need at least 2 probabilities")
    clipped = np.clip(u, PROB_FLOOR, PROB_CEIL)
    clamped = bool(np.any(clipped != u))
    y = stats.norm.ppf(clipped)
    spread = float(np.std(y, ddof=1))
    if not (spread > 0 and math.isfinite(spread)):
        raise UTDomainError("fitted probabilities are all equal; normal scores are undefined")
    v = stats.norm.cdf((y - float(np.mean(y))) / spread)
    a2, v_clamped = anderson_darling(v)
    w_star = cramer_von_mises(v) * (1.0 + 0.5 / n)
    a_star = a2 * (1.0 + 0.75 / n + 2.25 / n ** 2)
    return w_star, a_star, clamped or v_clamped


# ============================================================================
# REPORT
# ============================================================================

def gof_report(s, theta_hat: float) -> GofReport:
    s = as_sample(s)
    if s.n < 2:
        raise UTDomainError(f"goodness-of-fit report needs n >= 2 (got {s.n})")
    d = UnitTeissier(theta_hat)
    n, k = s.n, UT_PARAMS

    neg_loglik = objective(Method.MLE, d.theta, s)
    if not math.isfinite(neg_loglik):
        raise UTDomainError(f"log-likelihood is not finite at theta={d.theta}")
    u = np.asarray(cdf(d, s.sorted))
    a2, clamped = anderson_darling(u)
    try:
        w_star, a_star, star_clamped = normal_scores_statistics(u)
    except UTDomainError as e:
        logger.warning(f"⚠️  W* and A* unavailable: {e}")
        w_star, a_star, star_clamped = math.nan, math.nan, False
    clamped = clamped or star_clamped
    if clamped:
        logger.warning(f"⚠️  Fitted probabilities clamped to [{PROB_FLOOR}, {PROB_CEIL}] for A2")
    ks = kolmogorov_smirnov(u)

    aic = 2 * k + 2 * neg_loglik
    return GofReport(
        theta_hat=d.theta,
        n=n,
        k_params=k,
        neg_loglik=neg_loglik,
        aic=aic,
        caic=aic + 2.0 * k * (k + 1) / (n - k - 1),
        bic=k * math.log(n) + 2 * neg_loglik,
        hqic=2 * k * math.log(math.log(n)) + 2 * neg_loglik,
        w2=cramer_von_mises(u),
        a2=a2,
        w_star=w_star,
        a_star=a_star,
        ks=ks,
        ks_pvalue=ks_pvalue(ks, n),
        clamped=clamped,
    )


# ============================================================================
# PLOT-READY EXPORTS
# ============================================================================

def pp_points(s, theta_hat: float) -> List[Tuple[float, float]]:
    """((i - 0.5)/n, F(x_(i))) for i = 1..n."""
    s = as_sample(s)
    d = UnitTeissier(theta_hat)
    empirical = (np.arange(1, s.n + 1) - 0.5) / s.n
    theoretical = np.asarray(cdf(d, s.sorted))
    return [(float(e), float(t)) for e, t in zip(empirical, theoretical)]


def pp_frame(s, theta_hat: float) -> pd.DataFrame:
    return pd.DataFrame(pp_points(s, theta_hat), columns=["empirical", "theoretical"])


def fitted_curves(s, theta_hat: float, points: int = 200) -> pd.DataFrame:
    """Fitted pdf, cdf and sf on an interior grid alongside the empirical cdf."""
    if points < 2:
        raise UTDomainError("fitted_curves needs at least 2 grid points")
    s = as_sample(s)
    d = UnitTeissier(theta_hat)
    x = np.linspace(0.0, 1.0, points + 2)[1:-1]
    return pd.DataFrame({
        "x": x,
        "pdf": pdf(d, x),
        "cdf": cdf(d, x),
        "sf": sf(d, x),
        "empirical_cdf": np.searchsorted(s.sorted, x, side="right") / s.n,
    })


def histogram_density(s, bins: int = 20) -> pd.DataFrame:
    s = as_sample(s)
    density, edges = np.histogram(s.sorted, bins=bins, range=(0.0, 1.0), density=True)
    return pd.DataFrame({"bin_left": edges[:-1], "bin_right": edges[1:], "density": density})


def fit_summary_row(s, theta_hat: Optional[float] = None) -> pd.DataFrame:
    """The UT line of the real-data comparison table: estimate, SE, criteria and EDF statistics."""
    s = as_sample(s)
    if theta_hat is None:
        result = fit(Method.MLE, s)
        theta_hat, std_error = result.theta_hat, result.std_error
    else:
        std_error = mle_std_error(s, theta_hat)
    report = gof_report(s, theta_hat)
    return pd.DataFrame([{
        "model": "UT",
        "theta_hat": theta_hat,
        "std_error": std_error,
        "neg_loglik": report.neg_loglik,
        "aic": report.aic,
        "caic": report.caic,
        "bic": report.bic,
        "hqic": report.hqic,
        "w2": report.w2,
        "a2": report.a2,
        "w_star": report.w_star,
        "a_star": report.a_star,
        "ks": report.ks,
        "ks_pvalue": report.ks_pvalue,
    }])
