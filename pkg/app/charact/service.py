"""
Truncated-moment Characterization
=================================
The functions g and h for which

    E(X | X <= x) = g(x) f(x) / F(x)        E(X | X >= x) = h(x) f(x) / (1 - F(x))

hold exactly when X follows the UT law, and a numerical check of both
identities against quadrature of t f(t).
"""

import math
import logging
from typing import Callable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel

from app.exceptions import UTDomainError
from app.dist.service import UnitTeissier, pdf
from app.numerics.service import integrate
from app.specfun.service import scaled_upper_incomplete_gamma, upper_incomplete_gamma

logger = logging.getLogger(__name__)

# 1/(1 - x^theta) is singular at x = 1
X_CAP = 1.0 - 1e-6
# exp overflows just above this
_LOG_OVERFLOW = 709.0

CharFn = Callable[[UnitTeissier, float], float]


class TruncatedMomentCheck(BaseModel):
    x: float
    side: str  # "lower": X <= x, "upper": X >= x
    lhs: float
    rhs: float
    abs_gap: float


# ============================================================================
# HELPERS
# ============================================================================

def _check_point(x: float) -> float:
    x = float(x)
    if not 0.0 < x < 1.0:
        raise UTDomainError(f"characterization functions are defined on (0, 1) (got x={x})")
    return min(x, X_CAP)


def _scaled_gamma_gap(theta: float, t: float) -> float:
    """e^t [Gamma(2 - 1/theta, t) - Gamma(1 - 1/theta, t)]."""
    a = 1.0 - 1.0 / theta
    return scaled_upper_incomplete_gamma(a + 1.0, t) - scaled_upper_incomplete_gamma(a, t)


def _lower_gamma_gap(theta: float, x: float) -> float:
    """Gamma(2 - 1/theta, t) - Gamma(1 - 1/theta, t) at t = x^-theta, 0 once e^-t underflows."""
    log_t = -theta * math.log(x)
    if log_t > math.log(_LOG_OVERFLOW):
        return 0.0
    t = math.exp(log_t)
    return math.exp(-t) * _scaled_gamma_gap(theta, t)


def g_times_pdf(d: UnitTeissier, x: float) -> float:
    """
    g(x) f(x) = integral_0^x t f(t) dt = e [Gamma(2 - 1/theta, t) - Gamma(1 - 1/theta, t)],  t = x^-theta
    """
    x = _check_point(x)
    return math.e * _lower_gamma_gap(d.theta, x)


def h_times_pdf(d: UnitTeissier, x: float) -> float:
    """
    h(x) f(x) = integral_x^1 t f(t) dt
              = e [Gamma(2 - 1/theta, 1) - Gamma(1 - 1/theta, 1) - Gamma(2 - 1/theta, t) + Gamma(1 - 1/theta, t)]
    """
    x = _check_point(x)
    a = 1.0 - 1.0 / d.theta
    at_one = upper_incomplete_gamma(a + 1.0, 1.0) - upper_incomplete_gamma(a, 1.0)
    return max(math.e * (at_one - _lower_gamma_gap(d.theta, x)), 0.0)


# ============================================================================
# CHARACTERIZATION FUNCTIONS
# ============================================================================

def g_fn(d: UnitTeissier, x: float) -> float:
    """
    g(x) = x^(1+2 theta) e^(x^-theta) / (theta (1 - x^theta))
           * [Gamma(2 - 1/theta, x^-theta) - Gamma(1 - 1/theta, x^-theta)]

    Evaluated as x^(1+theta) e^t [Gamma gap] / (theta (t - 1)) so it stays
    finite for large t. Points above 1 - 1e-6 are evaluated at the cap.
    """
    x = _check_point(x)
    log_x = math.log(x)
    t_minus_1 = math.expm1(-d.theta * log_x)
    t = t_minus_1 + 1.0
    return math.exp((1.0 + d.theta) * log_x) * _scaled_gamma_gap(d.theta, t) / (d.theta * t_minus_1)


def h_fn(d: UnitTeissier, x: float) -> float:
    """
    h(x) = x^(1+2 theta) e^(x^-theta) / (theta (1 - x^theta))
           * [Gamma(2 - 1/theta, 1) - Gamma(1 - 1/theta, 1) - Gamma(2 - 1/theta, x^-theta) + Gamma(1 - 1/theta, x^-theta)]

    Returns inf where the e^(x^-theta) factor overflows (x close to 0).
    """
    x = _check_point(x)
    tail = h_times_pdf(d, x)
    if tail <= 0.0:
        return 0.0
    log_x = math.log(x)
    t_minus_1 = math.expm1(-d.theta * log_x)
    log_h = math.log(tail) + (1.0 + d.theta) * log_x + t_minus_1 - math.log(d.theta * t_minus_1)
    if log_h > _LOG_OVERFLOW:
        return math.inf
    return math.exp(log_h)


# ============================================================================
# VERIFICATION
# ============================================================================

def _first_moment_density(d: UnitTeissier) -> Callable[[float], float]:
    return lambda t: t * pdf(d, t)


def verify_characterization(
    d: UnitTeissier,
    grid: Sequence[float],
    g_func: Optional[CharFn] = None,
    h_func: Optional[CharFn] = None,
) -> List[TruncatedMomentCheck]:
    """
    For each grid point compare g f with integral_0^x t f and h f with
    integral_x^1 t f. Passing g_func / h_func checks a candidate pair instead
    of the UT one; their product with the UT density is compared.
    """
    points = np.asarray(grid, dtype=float)
    if np.any((points <= 0.01) | (points >= 0.99)):
        raise UTDomainError("verification grid points must lie in (0.01, 0.99)")

    integrand = _first_moment_density(d)
    checks = []
    for x in points:
        x = float(x)
        density = pdf(d, x)
        lower_lhs = g_times_pdf(d, x) if g_func is None else g_func(d, x) * density
        upper_lhs = h_times_pdf(d, x) if h_func is None else h_func(d, x) * density
        lower_rhs = integrate(integrand, 0.0, x)
        upper_rhs = integrate(integrand, x, 1.0)
        checks.append(TruncatedMomentCheck(
            x=x, side="lower", lhs=lower_lhs, rhs=lower_rhs, abs_gap=abs(lower_lhs - lower_rhs),
        ))
        checks.append(TruncatedMomentCheck(
            x=x, side="upper", lhs=upper_lhs, rhs=upper_rhs, abs_gap=abs(upper_lhs - upper_rhs),
        ))

    worst = max((c.abs_gap for c in checks), default=0.0)
    logger.info(f"Characterization check at theta={d.theta}: {len(points)} points, max gap {worst:.3e}")
    return checks
