"""
Order Statistics and L-moments
==============================
Raw moments, single moments of order statistics through two independent
closed forms, their variances, population and sample L-moments, and the
table regenerators used by the command line.

Both closed forms reduce to the moments of sample maxima

    mu_{i:i}^(k) = e^i / i^(i - k/theta) * [Gamma(i - k/theta + 1, i) - i Gamma(i - k/theta, i)]

combined with alternating binomial weights.
"""

import math
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel
from scipy import special

from app.exceptions import UTDomainError
from app.dist.service import UnitTeissier, cdf, pdf
from app.specfun.service import scaled_upper_incomplete_gamma

logger = logging.getLogger(__name__)

# Alternating sums lose all precision well before this size
MAX_ORDER_N = 64
GRID_THETAS = (1.0, 2.0, 3.0, 4.0)
GRID_MAX_N = 5


# ============================================================================
# MODELS
# ============================================================================

@dataclass(frozen=True)
class OrderStatIndex:
    """(n, r, k): k-th moment of the r-th smallest of n draws"""
    n: int
    r: int
    k: int = 1

    def __post_init__(self):
        for name in ("n", "r", "k"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise UTDomainError(f"{name} must be an integer (got {value})")
        if not 1 <= self.n <= MAX_ORDER_N:
            raise UTDomainError(f"n must lie in [1, {MAX_ORDER_N}] (got {self.n})")
        if not 1 <= self.r <= self.n:
            raise UTDomainError(f"r must satisfy 1 <= r <= n (got r={self.r}, n={self.n})")
        if self.k < 1:
            raise UTDomainError(f"moment order k must be >= 1 (got {self.k})")


class LMomentSet(BaseModel):
    """First four population L-moments and their ratios"""
    theta: float
    lambda1: float
    lambda2: float
    lambda3: float
    lambda4: float
    l_cv: float
    tau3: float
    tau4: float


# ============================================================================
# MAXIMA MOMENTS
# ============================================================================

def _check_order(k: int) -> int:
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise UTDomainError(f"moment order k must be a positive integer (got {k})")
    return int(k)


def maxima_moment(d: UnitTeissier, i: int, k: int = 1) -> float:
    """E[max(X_1..X_i)^k], the i-th maximum's k-th moment."""
    k = _check_order(k)
    if not 1 <= i <= MAX_ORDER_N:
        raise UTDomainError(f"i must lie in [1, {MAX_ORDER_N}] (got {i})")
    a = i - k / d.theta
    # e^i Gamma(., i) stays finite where the factors do not
    bracket = scaled_upper_incomplete_gamma(a + 1.0, i) - i * scaled_upper_incomplete_gamma(a, i)
    return math.exp(-a * math.log(i)) * bracket


def raw_moment(d: UnitTeissier, k: int) -> float:
    """E[X^k] = e [Gamma(2 - k/theta, 1) - Gamma(1 - k/theta, 1)]."""
    return maxima_moment(d, 1, k)


# ============================================================================
# ORDER STATISTICS
# ============================================================================

def _log_comb(n: int, m: int) -> float:
    return float(special.gammaln(n + 1) - special.gammaln(m + 1) - special.gammaln(n - m + 1))


def _alternating_sum(terms: List[float]) -> float:
    """Correctly rounded sum, largest magnitudes first."""
    return math.fsum(sorted(terms, key=abs, reverse=True))


def os_moment_t21(d: UnitTeissier, idx: OrderStatIndex) -> float:
    """
    sum_{i=r}^{n} (-1)^(i-r) C(i-1, r-1) C(n, i) mu_{i:i}^(k)

    For r = n only the i = n term survives.
    """
    n, r, k = idx.n, idx.r, idx.k
    terms = []
    for i in range(r, n + 1):
        sign = -1.0 if (i - r) % 2 else 1.0
        log_weight = _log_comb(i - 1, r - 1) + _log_comb(n, i)
        terms.append(sign * math.exp(log_weight) * maxima_moment(d, i, k))
    return _alternating_sum(terms)


def os_moment_t22(d: UnitTeissier, idx: OrderStatIndex) -> float:
    """
    n C(n-1, r-1) sum_{i=0}^{n-r} (-1)^i C(n-r, i) mu_{j:j}^(k) / j,   j = i + r
    """
    n, r, k = idx.n, idx.r, idx.k
    log_lead = math.log(n) + _log_comb(n - 1, r - 1)
    terms = []
    for i in range(0, n - r + 1):
        j = i + r
        sign = -1.0 if i % 2 else 1.0
        log_weight = log_lead + _log_comb(n - r, i) - math.log(j)
        terms.append(sign * math.exp(log_weight) * maxima_moment(d, j, k))
    return _alternating_sum(terms)


def os_moment(d: UnitTeissier, n: int, r: int, k: int = 1) -> float:
    return os_moment_t21(d, OrderStatIndex(n, r, k))


def os_variance(d: UnitTeissier, n: int, r: int) -> float:
    """V(X_{r:n}) = mu^(2) - (mu^(1))^2, floored at zero."""
    mean = os_moment_t21(d, OrderStatIndex(n, r, 1))
    second = os_moment_t21(d, OrderStatIndex(n, r, 2))
    return max(second - mean * mean, 0.0)


def order_stat_density(d: UnitTeissier, n: int, r: int, x) -> np.ndarray:
    """
    Density of X_{r:n}:
        n!/((r-1)!(n-r)!) F^(r-1) (1 - F)^(n-r) f
    """
    OrderStatIndex(n, r, 1)
    x_arr = np.asarray(x, dtype=float)
    big_f = np.asarray(cdf(d, x_arr))
    coef = math.exp(_log_comb(n - 1, r - 1)) * n
    values = coef * big_f ** (r - 1) * (1.0 - big_f) ** (n - r) * np.asarray(pdf(d, x_arr))
    if np.ndim(x) == 0:
        return float(values)
    return values


# ============================================================================
# L-MOMENTS
# ============================================================================

def l_moments(d: UnitTeissier) -> LMomentSet:
    """lambda_1..lambda_4 from the maxima moments (k = 1) plus L-CV, tau3, tau4."""
    m1, m2, m3, m4 = (maxima_moment(d, i, 1) for i in (1, 2, 3, 4))
    lam1 = m1
    lam2 = m2 - m1
    lam3 = math.fsum([2.0 * m3, -3.0 * m2, m1])
    lam4 = math.fsum([5.0 * m4, -10.0 * m3, 6.0 * m2, -m1])
    if lam2 <= 0:
        raise UTDomainError(f"lambda2 is not positive at theta={d.theta}")
    return LMomentSet(
        theta=d.theta,
        lambda1=lam1,
        lambda2=lam2,
        lambda3=lam3,
        lambda4=lam4,
        l_cv=lam2 / lam1,
        tau3=lam3 / lam2,
        tau4=lam4 / lam2,
    )


def sample_l_moments(values: Sequence[float]) -> Dict[str, float]:
    """
    Unbiased sample L-moments from the ordered data:
        l1 = b0,   l2 = 2 b1 - b0,   b1 = sum (i-1) x_(i) / (n (n-1))
    """
    x = np.sort(np.asarray(values, dtype=float))
    n = x.size
    if n < 2:
        raise UTDomainError(f"sample L-moments need n >= 2 (got {n})")
    b0 = math.fsum(x) / n
    b1 = math.fsum(np.arange(n) * x) / (n * (n - 1))
    return {"l1": b0, "l2": 2.0 * b1 - b0}


# ============================================================================
# TABLE REGENERATION
# ============================================================================

def order_stats_grid(thetas: Sequence[float] = GRID_THETAS, max_n: int = GRID_MAX_N) -> pd.DataFrame:
    """Means, second moments and variances of X_{r:n} for n = 1..max_n."""
    records = []
    for theta in thetas:
        d = UnitTeissier(theta)
        for n in range(1, max_n + 1):
            for r in range(1, n + 1):
                mean = os_moment_t21(d, OrderStatIndex(n, r, 1))
                second = os_moment_t21(d, OrderStatIndex(n, r, 2))
                records.append({
                    "theta": theta,
                    "n": n,
                    "r": r,
                    "mean": mean,
                    "second_moment": second,
                    "variance": max(second - mean * mean, 0.0),
                })
    logger.info(f"Order-statistic table built: {len(records)} rows")
    return pd.DataFrame.from_records(records)


def l_moments_grid(thetas: Sequence[float] = GRID_THETAS) -> pd.DataFrame:
    """L-moments and ratios, one row per theta."""
    return pd.DataFrame.from_records([l_moments(UnitTeissier(t)).model_dump() for t in thetas])


def order_stats_table(d: UnitTeissier, n_max: int, k: Optional[int] = None) -> pd.DataFrame:
    """Every (n, r) up to n_max at a single theta."""
    records = []
    for n in range(1, n_max + 1):
        for r in range(1, n + 1):
            mean = os_moment(d, n, r, 1)
            second = os_moment(d, n, r, 2)
            row = {"n": n, "r": r, "mean": mean, "second_moment": second,
                   "variance": max(second - mean * mean, 0.0)}
            if k is not None and k > 2:
                row[f"moment_{k}"] = os_moment(d, n, r, k)
            records.append(row)
    return pd.DataFrame.from_records(records)
