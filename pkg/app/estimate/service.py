"""
Parameter Estimation
====================
Nine estimators of theta, each written as a scalar objective (smaller is
better) minimized over log(theta) by a shared driver, plus the observed
information standard error of the MLE.

Objectives never raise on non-finite intermediates; they return +inf so the
optimizer backs away from that region.
"""

import math
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from config import settings
from app.exceptions import ConvergenceError, UTDomainError
from app.dist.service import UnitTeissier
from app.moments.service import raw_moment
from app.numerics.service import Bracket, find_root, minimize_scalar, second_derivative
from app.specfun.service import lambert_w_m1

logger = logging.getLogger(__name__)

# Relative jitter separating tied observations before spacings are formed
TIE_JITTER = 1e-12
# Fits this close to a bracket end (in log theta) are boundary solutions
BOUNDARY_MARGIN = 1e-6

ObjectiveFn = Callable[[float], float]


# ============================================================================
# MODELS
# ============================================================================

class Method(str, Enum):
    """Estimation methods, in the column order of the simulation tables"""
    MLE = "MLE"
    LSE = "LSE"
    WLSE = "WLSE"
    CRVME = "CRVME"
    MPSE = "MPSE"
    PCE = "PCE"
    ADE = "ADE"
    RADE = "RADE"
    LME = "LME"

    @classmethod
    def _missing_(cls, value):
        if isinstance(value, str):
            key = value.strip().upper()
            if key == "RTADE":
                return cls.RADE
            for member in cls:
                if member.value == key:
                    return member
        return None


# MLE and MPSE are defined for a single observation
_SINGLE_OBSERVATION_METHODS = (Method.MLE, Method.MPSE)


@dataclass(frozen=True, eq=False)
class Sample:
    """Observations strictly inside (0, 1); `sorted` ascending, `original` as read"""
    sorted: np.ndarray
    original: Tuple[float, ...]

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "Sample":
        arr = np.asarray(list(values), dtype=float)
        if arr.size == 0:
            raise UTDomainError("sample is empty")
        if not np.all(np.isfinite(arr)):
            raise UTDomainError("sample contains non-finite values")
        outside = np.flatnonzero((arr <= 0.0) | (arr >= 1.0))
        if outside.size:
            i = int(outside[0])
            raise UTDomainError(f"observation #{i + 1} = {arr[i]!r} lies outside (0, 1)")
        ordered = np.sort(arr)
        ordered.setflags(write=False)
        return cls(sorted=ordered, original=tuple(float(v) for v in arr))

    @property
    def n(self) -> int:
        return int(self.sorted.size)

    def __len__(self) -> int:
        return self.n


class FitResult(BaseModel):
    method: Method
    theta_hat: float
    std_error: Optional[float] = None
    objective_at_opt: float
    converged: bool
    iterations: int


def as_sample(values) -> Sample:
    return values if isinstance(values, Sample) else Sample.from_values(values)


# ============================================================================
# CLOSED-FORM PIECES
# ============================================================================

def _log_parts(log_x: np.ndarray, theta: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(t - 1, log F, log S) at each observation, t = x^-theta."""
    with np.errstate(over='ignore', invalid='ignore', divide='ignore'):
        log_t = -theta * log_x
        t_minus_1 = np.expm1(log_t)
        # log F = log t + 1 - t
        log_f = log_t - t_minus_1
        log_s = np.log(-np.expm1(log_f))
    return t_minus_1, log_f, log_s


def _finite_or_inf(value: float) -> float:
    value = float(value)
    return value if math.isfinite(value) else math.inf


class _ObjectiveContext:
    """Sample-dependent constants shared by every evaluation of one objective."""

    def __init__(self, s: Sample):
        x = s.sorted
        n = s.n
        self.n = n
        self.x = x
        self.log_x = np.log(x)
        self.i = np.arange(1, n + 1, dtype=float)
        self.odd = 2.0 * self.i - 1.0
        self.plotting = self.i / (n + 1)
        self.cvm_positions = self.odd / (2.0 * n)
        self.wlse_weights = (n + 1) ** 2 * (n + 2) / (self.i * (n - self.i + 1))
        self._pce_log_t = None
        self._mpse_log_x = None
        self._l1 = None

    @property
    def pce_log_t(self) -> np.ndarray:
        """log t_i with t_i = -W_{-1}(-p_i / e), p_i = i/(n+1)."""
        if self._pce_log_t is None:
            t = -np.asarray(lambert_w_m1(-self.plotting * math.exp(-1.0)))
            self._pce_log_t = np.log(np.atleast_1d(t))
        return self._pce_log_t

    @property
    def mpse_log_x(self) -> np.ndarray:
        if self._mpse_log_x is None:
            x = self.x.copy()
            ties = 0
            for j in range(1, x.size):
                if x[j] <= x[j - 1]:
                    x[j] = x[j - 1] * (1.0 + TIE_JITTER)
                    ties += 1
            if ties:
                logger.debug(f"MPSE: {ties} tied observations separated by relative jitter {TIE_JITTER}")
            self._mpse_log_x = np.log(np.minimum(x, np.nextafter(1.0, 0.0)))
        return self._mpse_log_x

    @property
    def l1(self) -> float:
        if self._l1 is None:
            self._l1 = math.fsum(self.x) / self.n
        return self._l1


# ============================================================================
# OBJECTIVES
# ============================================================================

def _neg_loglik(ctx: _ObjectiveContext, theta: float) -> float:
    """-l(theta) = -[n log theta - (theta+1) sum log x + sum log(t-1) - sum (t-1)]"""
    t_minus_1, _, _ = _log_parts(ctx.log_x, theta)
    with np.errstate(divide='ignore', invalid='ignore'):
        ll = (ctx.n * math.log(theta) - (theta + 1.0) * math.fsum(ctx.log_x)
              + np.sum(np.log(t_minus_1)) - np.sum(t_minus_1))
    return _finite_or_inf(-ll)


def _lse(ctx: _ObjectiveContext, theta: float) -> float:
    _, log_f, _ = _log_parts(ctx.log_x, theta)
    return _finite_or_inf(np.sum((np.exp(log_f) - ctx.plotting) ** 2))


def _wlse(ctx: _ObjectiveContext, theta: float) -> float:
    _, log_f, _ = _log_parts(ctx.log_x, theta)
    return _finite_or_inf(np.sum(ctx.wlse_weights * (np.exp(log_f) - ctx.plotting) ** 2))


def _crvme(ctx: _ObjectiveContext, theta: float) -> float:
    _, log_f, _ = _log_parts(ctx.log_x, theta)
    return _finite_or_inf(1.0 / (12.0 * ctx.n) + np.sum((np.exp(log_f) - ctx.cvm_positions) ** 2))


def _mpse(ctx: _ObjectiveContext, theta: float) -> float:
    """
    Negated mean log spacing, F(x_0) = 0 and F(x_{n+1}) = 1.

    Spacings are formed in log space so an underflowed F(x_1) still counts.
    """
    _, log_f, log_s = _log_parts(ctx.mpse_log_x, theta)
    log_spacings = np.empty(ctx.n + 1)
    log_spacings[0] = log_f[0]
    with np.errstate(divide='ignore', invalid='ignore'):
        # log(F_i - F_{i-1}) = log F_i + log(1 - F_{i-1}/F_i)
        log_spacings[1:-1] = log_f[1:] + np.log(-np.expm1(log_f[:-1] - log_f[1:]))
    log_spacings[-1] = log_s[-1]
    if not np.all(np.isfinite(log_spacings)):
        return math.inf
    return _finite_or_inf(-np.sum(log_spacings) / (ctx.n + 1))


def _ade(ctx: _ObjectiveContext, theta: float) -> float:
    """-n - (1/n) sum (2i-1) [log F(x_i) + log S(x_{n+1-i})]"""
    _, log_f, log_s = _log_parts(ctx.log_x, theta)
    with np.errstate(invalid='ignore'):
        total = np.sum(ctx.odd * (log_f + log_s[::-1]))
    return _finite_or_inf(-ctx.n - total / ctx.n)


def _rade(ctx: _ObjectiveContext, theta: float) -> float:
    """n/2 - 2 sum F(x_i) - (1/n) sum (2i-1) log S(x_{n+1-i})"""
    _, log_f, log_s = _log_parts(ctx.log_x, theta)
    with np.errstate(invalid='ignore'):
        value = ctx.n / 2.0 - 2.0 * np.sum(np.exp(log_f)) - np.sum(ctx.odd * log_s[::-1]) / ctx.n
    return _finite_or_inf(value)


def _pce(ctx: _ObjectiveContext, theta: float) -> float:
    """sum (x_i - Q(p_i))^2 with Q(p) = t^(-1/theta)"""
    with np.errstate(over='ignore', under='ignore'):
        model = np.exp(-ctx.pce_log_t / theta)
    return _finite_or_inf(np.sum((ctx.x - model) ** 2))


def _lme(ctx: _ObjectiveContext, theta: float) -> float:
    """(mu_1(theta) - l1)^2"""
    try:
        mu1 = raw_moment(UnitTeissier(theta), 1)
    except (UTDomainError, OverflowError, ZeroDivisionError):
        return math.inf
    return _finite_or_inf((mu1 - ctx.l1) ** 2)


_OBJECTIVES: Dict[Method, Callable[[_ObjectiveContext, float], float]] = {
    Method.MLE: _neg_loglik,
    Method.LSE: _lse,
    Method.WLSE: _wlse,
    Method.CRVME: _crvme,
    Method.MPSE: _mpse,
    Method.PCE: _pce,
    Method.ADE: _ade,
    Method.RADE: _rade,
    Method.LME: _lme,
}


def build_objective(method, s) -> ObjectiveFn:
    """theta -> objective value, with the sample constants computed once."""
    method = Method(method)
    ctx = _ObjectiveContext(as_sample(s))
    kernel = _OBJECTIVES[method]

    def evaluate(theta: float) -> float:
        if not (theta > 0 and math.isfinite(theta)):
            return math.inf
        return kernel(ctx, theta)

    return evaluate


def objective(method, theta: float, s) -> float:
    return build_objective(method, s)(theta)


def log_likelihood(s, theta: float) -> float:
    return -objective(Method.MLE, theta, s)


def printed_objective(method, theta: float, s) -> float:
    """
    ADE and RADE expansions exactly as typeset in the source derivation:

        A = -n - 1/n + sum (2i-1) [log F(x_i) - (x_i^-theta + 1) + theta log x_i]
        R = -n/2 - 2 sum F(x_i) - (1/n) sum (2i-1) [theta log x_i - (x_i^-theta + 1)]

    They are not minimized at a sensible theta and are never used by `fit`;
    kept for comparison against the standard statistics.
    """
    method = Method(method)
    s = as_sample(s)
    ctx = _ObjectiveContext(s)
    t_minus_1, log_f, _ = _log_parts(ctx.log_x, theta)
    t = t_minus_1 + 1.0
    if method is Method.ADE:
        return float(-ctx.n - 1.0 / ctx.n + np.sum(ctx.odd * (log_f - (t + 1.0) + theta * ctx.log_x)))
    if method is Method.RADE:
        return float(-ctx.n / 2.0 - 2.0 * np.sum(np.exp(log_f))
                     - np.sum(ctx.odd * (theta * ctx.log_x - (t + 1.0))) / ctx.n)
    raise UTDomainError(f"no printed expansion is kept for {method.value}")


# ============================================================================
# SCORE / STANDARD ERROR
# ============================================================================

def score(s, theta: float) -> float:
    """dl/dtheta = n/theta - sum log x - sum t log x / (t - 1) + sum t log x"""
    s = as_sample(s)
    log_x = np.log(s.sorted)
    t_minus_1 = np.expm1(-theta * log_x)
    t = t_minus_1 + 1.0
    return float(s.n / theta - np.sum(log_x) - np.sum(t * log_x / t_minus_1) + np.sum(t * log_x))


def mle_std_error(s, theta_hat: float) -> float:
    """Wald standard error sqrt(1 / -l''(theta_hat)) from a five-point stencil."""
    s = as_sample(s)
    if not (theta_hat > 0 and math.isfinite(theta_hat)):
        raise UTDomainError(f"theta_hat must be positive and finite (got {theta_hat})")
    neg_loglik = build_objective(Method.MLE, s)
    h = 1e-4 * max(1.0, theta_hat)
    curvature = second_derivative(lambda th: -neg_loglik(th), theta_hat, h)
    information = -curvature
    if not (information > 0 and math.isfinite(information)):
        raise ConvergenceError(
            f"observed information {information:.6g} is not positive at theta={theta_hat:.6g}; "
            "the estimate is a boundary or non-maximum solution"
        )
    return math.sqrt(1.0 / information)


# ============================================================================
# FITTING
# ============================================================================

def default_bracket() -> Bracket:
    return Bracket(math.log(settings.THETA_MIN), math.log(settings.THETA_MAX))


def _fit_lme(s: Sample, bracket: Bracket, evaluate: ObjectiveFn):
    """Root of mu_1(e^u) - l1 when the bracket straddles it, else least squares."""
    l1 = math.fsum(s.sorted) / s.n

    def residual(u: float) -> float:
        return raw_moment(UnitTeissier(math.exp(u)), 1) - l1

    try:
        report = find_root(residual, bracket)
        return report.argmin_or_root, evaluate(math.exp(report.argmin_or_root)), report
    except UTDomainError:
        logger.info(f"LME: l1={l1:.6g} outside the mean range of the bracket; minimizing the squared residual")
    report = minimize_scalar(lambda u: evaluate(math.exp(u)), bracket)
    return report.argmin_or_root, report.value, report


def fit(method, s, bracket: Optional[Bracket] = None) -> FitResult:
    """Estimate theta by one method; search runs on log(theta) over the shared bracket."""
    method = Method(method)
    s = as_sample(s)
    if s.n < 2 and method not in _SINGLE_OBSERVATION_METHODS:
        raise UTDomainError(f"{method.value} needs at least 2 observations (got {s.n})")
    bracket = bracket or default_bracket()
    evaluate = build_objective(method, s)

    if method is Method.LME:
        u_hat, value, report = _fit_lme(s, bracket, evaluate)
    else:
        report = minimize_scalar(lambda u: evaluate(math.exp(u)), bracket)
        u_hat, value = report.argmin_or_root, report.value

    converged = bool(report.converged) and math.isfinite(value)
    if min(u_hat - bracket.lo, bracket.hi - u_hat) < BOUNDARY_MARGIN:
        logger.warning(f"⚠️  {method.value} estimate hit the search boundary (theta={math.exp(u_hat):.6g})")
        converged = False

    theta_hat = math.exp(u_hat)
    std_error = None
    if method is Method.MLE and converged:
        try:
            std_error = mle_std_error(s, theta_hat)
        except ConvergenceError as e:
            logger.warning(f"⚠️  MLE standard error unavailable: {e}")

    if converged:
        logger.debug(f"{method.value}: theta_hat={theta_hat:.6g} objective={value:.6g} (n={s.n})")
    else:
        logger.warning(f"⚠️  {method.value} did not converge (n={s.n}, theta_hat={theta_hat:.6g})")

    return FitResult(
        method=method,
        theta_hat=theta_hat,
        std_error=std_error,
        objective_at_opt=value,
        converged=converged,
        iterations=report.iterations,
    )


def fit_all(s, methods: Optional[Sequence] = None) -> Dict[Method, FitResult]:
    s = as_sample(s)
    methods = [Method(m) for m in (methods or list(Method))]
    return {m: fit(m, s) for m in methods}
