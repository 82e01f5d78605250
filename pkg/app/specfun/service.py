"""
Special Functions
=================
Upper incomplete gamma for any real first argument and the lower real branch
W_{-1} of the Lambert W function. Both closed forms of the UT distribution
(moments, characterization functions, quantile) reduce to these two.
"""

import math
import logging
from typing import Union

import numpy as np
from scipy import special

from app.exceptions import ConvergenceError, UTDomainError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# 1/e split into the nearest double and its rounding remainder
INV_E = 0.36787944117144233
_INV_E_LO = -1.2428753672788363e-17
# Inputs this far below -1/e are still accepted as the branch point
BRANCH_SNAP = 1e-14
# Below this distance z + 1/e the branch-point series replaces scipy
BRANCH_SERIES_BAND = 1e-3
# Gamma(a) overflows double precision just above 171.6
_GAMMA_OVERFLOW = 171.0
# Width of the interpolated band below each non-positive integer
NEAR_INTEGER = 1e-7
_INTERP_STEP = 1e-6
# Continued fraction is used from this b upward (for a <= 0, or b >= a + 1)
CF_MIN_B = 1.0
_CF_TINY = 1e-300
_CF_EPS = 1e-16
_CF_MAX_ITER = 10_000


# ============================================================================
# INCOMPLETE GAMMA
# ============================================================================

def _check_gamma_args(a: float, b: float):
    if not (math.isfinite(a) and math.isfinite(b)):
        raise UTDomainError(f"upper_incomplete_gamma needs finite arguments (got a={a}, b={b})")
    if b <= 0.0:
        raise UTDomainError(f"upper_incomplete_gamma needs b > 0 (got b={b})")


def _positive_gamma_tail(a: float, b: float) -> float:
    """Gamma(a, b) for a > 0 through the regularized complement Q(a, b)."""
    q = special.gammaincc(a, b)
    if a < _GAMMA_OVERFLOW:
        return float(special.gamma(a) * q)
    if q <= 0.0:
        return 0.0
    return math.exp(special.gammaln(a) + math.log(q))


def _gamma_tail_fraction(a: float, b: float) -> float:
    """
    h with Gamma(a, b) = b^a e^(-b) h, from the Legendre continued fraction

        h = 1/(b+1-a - 1(1-a)/(b+3-a - 2(2-a)/(b+5-a - ...)))

    evaluated by the modified Lentz method. Valid for every real a; converges
    quickly once b >= max(1, a + 1).
    """
    denom = b + 1.0 - a
    c = 1.0 / _CF_TINY
    d = 1.0 / denom
    h = d
    for i in range(1, _CF_MAX_ITER + 1):
        an = -i * (i - a)
        denom += 2.0
        d = an * d + denom
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = denom + an / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) <= _CF_EPS:
            return h
    raise ConvergenceError(
        f"incomplete gamma continued fraction did not converge for a={a}, b={b}",
        best=h,
    )


def _use_fraction(a: float, b: float) -> bool:
    return b >= CF_MIN_B and (a <= 0.0 or b >= a + 1.0)


def upper_incomplete_gamma(a: float, b: float) -> float:
    """
    Gamma(a, b) = integral from b to infinity of t^(a-1) e^(-t) dt.

    Defined for every finite real a as long as b > 0. Positive a goes through
    scipy's regularized Q. For a <= 0 and b >= 1 the continued fraction is
    used; below b = 1 non-positive a is reached by downward recurrence
        Gamma(a, b) = (Gamma(a + 1, b) - b^a e^(-b)) / a
    started from the fractional part of a in (0, 1) for non-integer a, or
    from Gamma(0, b) = E1(b) for integer a. Arguments just below a
    non-positive integer are interpolated in a.
    """
    a = float(a)
    b = float(b)
    _check_gamma_args(a, b)

    if a > 0.0:
        return _positive_gamma_tail(a, b)
    if b >= CF_MIN_B:
        return math.exp(a * math.log(b) - b) * _gamma_tail_fraction(a, b)

    nearest = math.ceil(a)
    if a != nearest and nearest - a < NEAR_INTEGER:
        # Just below 0, -1, -2, ...: the recurrence would divide by ~(a - nearest).
        # Interpolate between the integer value and one a step above it.
        at_int = _downward_recurrence(nearest, b)
        above = _downward_recurrence(nearest + _INTERP_STEP, b)
        return at_int + (a - nearest) * (above - at_int) / _INTERP_STEP

    return _downward_recurrence(a, b)


def _downward_recurrence(a: float, b: float) -> float:
    """Gamma(a, b) for a <= 0 (or a slightly above a non-positive integer) and b < 1."""
    if a > 0.0:
        return _positive_gamma_tail(a, b)
    log_b = math.log(b)
    steps = int(-math.floor(a))
    if a == math.floor(a):
        # 0, -1, -2, ...: exponential-integral branch
        value = float(special.exp1(b))
        current = 0.0
    else:
        current = a + steps
        value = _positive_gamma_tail(current, b)

    for _ in range(steps):
        current -= 1.0
        value = (value - math.exp(current * log_b - b)) / current

    return value


def scaled_upper_incomplete_gamma(a: float, b: float) -> float:
    """
    e^b * Gamma(a, b), finite for large b where both factors over/underflow.

    In the continued-fraction region this is b^a h directly, so no e^(-b)
    is ever formed.
    """
    a = float(a)
    b = float(b)
    _check_gamma_args(a, b)
    if _use_fraction(a, b):
        return math.exp(a * math.log(b)) * _gamma_tail_fraction(a, b)
    if b <= 700.0:
        return upper_incomplete_gamma(a, b) * math.exp(b)
    # a > b - 1 > 699: Q(a, b) is not small, work in logs
    q = special.gammaincc(a, b)
    return math.exp(special.gammaln(a) + math.log(q) + b)


# ============================================================================
# LAMBERT W, LOWER BRANCH
# ============================================================================

# W = -1 + p - p^2/3 + 11/72 p^3 - ... with p = -sqrt(2(e z + 1)) on the lower branch
_BRANCH_SERIES = (
    -1.0,
    1.0,
    -1.0 / 3.0,
    11.0 / 72.0,
    -43.0 / 540.0,
    769.0 / 17280.0,
    -221.0 / 8505.0,
    680863.0 / 43545600.0,
    -1963.0 / 204120.0,
    226287557.0 / 37623398400.0,
)


def _branch_series(gap: np.ndarray) -> np.ndarray:
    """W_{-1} at z = -1/e + gap for small gap >= 0."""
    p = -np.sqrt(2.0 * math.e * gap)
    return np.polynomial.polynomial.polyval(p, _BRANCH_SERIES)


def _halley_polish(w: np.ndarray, z: np.ndarray) -> np.ndarray:
    """One Halley step on w e^w = z, kept only where it lowers the residual."""
    ew = np.exp(w)
    f = w * ew - z
    wp1 = w + 1.0
    with np.errstate(divide='ignore', invalid='ignore'):
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        candidate = w - f / denom
    better = np.isfinite(candidate) & (np.abs(candidate * np.exp(candidate) - z) < np.abs(f))
    return np.where(better, candidate, w)


def lambert_w_m1(z: ArrayLike) -> ArrayLike:
    """
    Lower real branch W_{-1}(z) for -1/e <= z < 0, returning w <= -1.

    Within 1e-3 of the branch point the value comes from the series in
    p = -sqrt(2(e z + 1)); elsewhere scipy's value is Halley-polished.
    Accepts a scalar or an array; returns the same shape.
    """
    z_arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z_arr)):
        raise UTDomainError("lambert_w_m1 needs finite arguments")
    if np.any(z_arr >= 0.0) or np.any(z_arr < -INV_E - BRANCH_SNAP):
        raise UTDomainError("lambert_w_m1 is defined on [-1/e, 0)")

    # z + 1/e, exact to a few ulps of 1/e
    gap = np.maximum((z_arr + INV_E) + _INV_E_LO, 0.0)
    near = gap < BRANCH_SERIES_BAND
    far_z = np.where(near, -0.5 * INV_E, z_arr)
    w = np.real(special.lambertw(far_z, k=-1))
    for _ in range(2):
        w = _halley_polish(w, far_z)
    # Halley corrections near the branch point are dominated by rounding in w e^w - z
    w = np.where(near, _branch_series(np.where(near, gap, 0.0)), w)
    w = np.minimum(w, -1.0)

    if np.ndim(z) == 0:
        return float(w)
    return w
