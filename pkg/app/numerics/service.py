"""
Numerical Plumbing
==================
Bounded scalar minimization, bracketed root finding, adaptive quadrature and
a five-point second derivative. Every estimator, moment oracle and standard
error in the toolkit goes through these four entry points.
"""

import math
import logging
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate as sp_integrate
from scipy import optimize

from config import settings
from app.exceptions import ConvergenceError, QuadratureError, UTDomainError

logger = logging.getLogger(__name__)

ScalarFn = Callable[[float], float]


# ============================================================================
# MODELS
# ============================================================================

@dataclass(frozen=True)
class Bracket:
    """Search interval [lo, hi] with lo < hi"""
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise UTDomainError(f"Bracket ends must be finite (got {self.lo}, {self.hi})")
        if not self.lo < self.hi:
            raise UTDomainError(f"Bracket needs lo < hi (got {self.lo}, {self.hi})")

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass(frozen=True)
class SolverReport:
    """Outcome of minimize_scalar / find_root"""
    argmin_or_root: float
    value: float
    iterations: int
    converged: bool
    tolerance_used: float


# ============================================================================
# MINIMIZATION
# ============================================================================

def _safe_eval(f: ScalarFn, x: float) -> float:
    try:
        value = float(f(x))
    except (ValueError, ZeroDivisionError, OverflowError, FloatingPointError):
        return math.inf
    return value if not math.isnan(value) else math.inf


def minimize_scalar(
    f: ScalarFn,
    bracket: Bracket,
    tol: Optional[float] = None,
    grid_points: Optional[int] = None,
) -> SolverReport:
    """
    Global-then-local bounded minimization on [lo, hi].

    A coarse uniform scan picks the best cell, then Brent's golden-section /
    parabolic method (scipy's bounded variant) refines inside the two
    neighbouring cells. Both bracket ends are always candidates, so monotone
    objectives return the boundary.
    """
    tol = settings.OPT_TOL if tol is None else tol
    grid_points = settings.OPT_GRID_POINTS if grid_points is None else grid_points
    if tol <= 0:
        raise UTDomainError("minimize_scalar needs tol > 0")

    grid = np.linspace(bracket.lo, bracket.hi, max(grid_points, 3))
    values = np.array([_safe_eval(f, x) for x in grid])
    if not np.any(np.isfinite(values)):
        return SolverReport(float(grid[0]), math.inf, 0, False, tol)

    j = int(np.argmin(values))
    lo = grid[max(j - 1, 0)]
    hi = grid[min(j + 1, len(grid) - 1)]

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = optimize.minimize_scalar(
            lambda x: _safe_eval(f, x),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": tol, "maxiter": settings.OPT_MAX_ITER},
        )

    best_x, best_f = float(res.x), float(res.fun)
    # Scan points and bracket ends compete with the refined point
    for x, fx in ((grid[j], values[j]), (bracket.lo, values[0]), (bracket.hi, values[-1])):
        if fx < best_f:
            best_x, best_f = float(x), float(fx)

    converged = bool(res.success) and math.isfinite(best_f)
    if not converged:
        logger.warning(f"⚠️  minimize_scalar stopped after {res.nit} iterations on [{lo:.6g}, {hi:.6g}]")
    return SolverReport(best_x, best_f, int(res.nit) + len(grid), converged, tol)


# ============================================================================
# ROOT FINDING
# ============================================================================

def find_root(f: ScalarFn, bracket: Bracket, tol: Optional[float] = None) -> SolverReport:
    """Brent root (bisection / secant / inverse quadratic) on a sign-changing bracket."""
    tol = settings.ROOT_TOL if tol is None else tol
    f_lo = float(f(bracket.lo))
    f_hi = float(f(bracket.hi))
    if f_lo == 0.0:
        return SolverReport(bracket.lo, 0.0, 0, True, tol)
    if f_hi == 0.0:
        return SolverReport(bracket.hi, 0.0, 0, True, tol)
    if not (math.isfinite(f_lo) and math.isfinite(f_hi)) or f_lo * f_hi > 0:
        raise UTDomainError(
            f"No sign change on [{bracket.lo:.6g}, {bracket.hi:.6g}] "
            f"(f = {f_lo:.6g}, {f_hi:.6g}); expand the bracket"
        )

    root, info = optimize.brentq(
        f, bracket.lo, bracket.hi,
        xtol=tol, rtol=4 * np.finfo(float).eps,
        maxiter=settings.OPT_MAX_ITER, full_output=True, disp=False,
    )
    if not info.converged:
        logger.warning(f"⚠️  find_root did not converge: {info.flag}")
    return SolverReport(float(root), float(f(root)), int(info.iterations), bool(info.converged), tol)


# ============================================================================
# QUADRATURE
# ============================================================================

def integrate(f: ScalarFn, lo: float, hi: float, rel_tol: Optional[float] = None) -> float:
    """Adaptive Gauss-Kronrod quadrature; raises QuadratureError with the best estimate on failure."""
    rel_tol = settings.QUAD_REL_TOL if rel_tol is None else rel_tol
    if not lo < hi:
        raise UTDomainError(f"integrate needs lo < hi (got {lo}, {hi})")

    with warnings.catch_warnings():
        warnings.simplefilter("error", sp_integrate.IntegrationWarning)
        try:
            value, _ = sp_integrate.quad(
                f, lo, hi, epsabs=1e-15, epsrel=rel_tol, limit=settings.QUAD_MAX_PANELS,
            )
        except sp_integrate.IntegrationWarning as exc:
            warnings.simplefilter("ignore", sp_integrate.IntegrationWarning)
            best, _ = sp_integrate.quad(
                f, lo, hi, epsabs=1e-15, epsrel=rel_tol, limit=settings.QUAD_MAX_PANELS,
            )
            raise QuadratureError(f"Quadrature on [{lo}, {hi}] did not reach rel_tol={rel_tol}: {exc}", best=best)
    return float(value)


# ============================================================================
# FINITE DIFFERENCES
# ============================================================================

def second_derivative(f: ScalarFn, x: float, h: float) -> float:
    """Five-point central stencil for f''(x)."""
    if h <= 0:
        raise UTDomainError("second_derivative needs h > 0")
    points = [f(x - 2 * h), f(x - h), f(x), f(x + h), f(x + 2 * h)]
    if not all(math.isfinite(p) for p in points):
        raise ConvergenceError(f"Non-finite evaluation near x={x} while differentiating")
    fm2, fm1, f0, fp1, fp2 = points
    return (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h)
