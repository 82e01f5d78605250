"""
Domain Exceptions
=================
Errors raised by the toolkit. Views map them to HTTP status codes and the
command line maps them to exit codes (1 for domain errors, 2 for convergence).
"""

from typing import Optional, Sequence, Tuple


class UTError(Exception):
    """Base class for toolkit errors"""


class UTDomainError(UTError, ValueError):
    """Argument outside the domain of an operation"""


class DatasetError(UTDomainError):
    """A dataset token could not be accepted"""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None, token: Optional[str] = None):
        location = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{location}")
        self.line = line
        self.column = column
        self.token = token


class ConvergenceError(UTError, RuntimeError):
    """A numerical procedure stopped before meeting its tolerance"""

    def __init__(self, message: str, best: Optional[float] = None):
        super().__init__(message)
        self.best = best


class QuadratureError(ConvergenceError):
    """Adaptive quadrature exhausted its subdivision budget"""


class IncompleteGridError(UTDomainError):
    """Simulation rows do not cover a full (theta, n, method) grid"""

    def __init__(self, missing: Sequence[Tuple[float, int, str]]):
        shown = ", ".join(f"(theta={t}, n={n}, {m})" for t, n, m in list(missing)[:10])
        more = f" and {len(missing) - 10} more" if len(missing) > 10 else ""
        super().__init__(f"Missing simulation cells: {shown}{more}")
        self.missing = list(missing)
