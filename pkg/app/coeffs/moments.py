"""
Weighted L¹ moments of coefficient derivatives and the Ψ function.

moment_check certifies (1+|t|)^r a'(t) ∈ L¹ by adaptive Gauss–Kronrod
quadrature (QUADPACK through scipy) on windows [-T, T] whose half-width is
doubled until the increment and the extrapolated tail are below tolerance.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from app.coeffs.expression import ArrayLike, CoeffExpr
from app.config.settings import CoeffConfig
from app.errors import ConfigError, EvaluationError

logger = logging.getLogger(__name__)


@dataclass
class MomentReport:
    order: int
    value: float
    converged: bool
    tail_bound: float
    window: float  # final half-width T

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "value": self.value,
            "converged": self.converged,
            "tail_bound": self.tail_bound,
            "window": self.window,
        }


def _quad(f: Callable[[float], float], a: float, b: float, tol: float, limit: int) -> float:
    value, _ = integrate.quad(f, a, b, limit=limit, epsabs=tol, epsrel=1e-10)
    return value


def _tail_estimate(increment: float, previous: Optional[float]) -> float:
    if increment == 0.0:
        return 0.0
    if previous is None:
        return increment
    if increment >= previous:
        return math.inf
    ratio = increment / previous
    return increment * ratio / (1.0 - ratio)


def moment_check(expr: CoeffExpr, r: int, tol: float, config: Optional[CoeffConfig] = None) -> MomentReport:
    if r < 0:
        raise ConfigError(f"Moment order must be nonnegative, got {r}")
    config = config or CoeffConfig()

    if expr.is_constant:
        return MomentReport(order=r, value=0.0, converged=True, tail_bound=0.0, window=0.0)

    def integrand(t: float) -> float:
        return (1.0 + abs(t)) ** r * abs(expr.prime(t))

    quad_tol = tol * 1e-3
    half_width = 1.0
    increment = math.inf
    previous = None
    try:
        value = _quad(integrand, -1.0, 0.0, quad_tol, config.quad_limit)
        value += _quad(integrand, 0.0, 1.0, quad_tol, config.quad_limit)
        while 2.0 * half_width <= config.window_cap:
            increment = _quad(integrand, -2.0 * half_width, -half_width, quad_tol, config.quad_limit)
            increment += _quad(integrand, half_width, 2.0 * half_width, quad_tol, config.quad_limit)
            value += increment
            half_width *= 2.0
            tail = _tail_estimate(increment, previous)
            if increment < tol and tail < tol:
                logger.debug("Moment r=%d of %s converged at T=%g", r, expr, half_width)
                return MomentReport(r, value, True, tail, half_width)
            previous = increment
    except EvaluationError as e:
        logger.warning("Moment r=%d of %s not evaluable: %s", r, expr, e)
        return MomentReport(r, math.inf, False, math.inf, half_width)

    logger.info("Moment r=%d of %s did not converge below T=%g", r, expr, half_width)
    return MomentReport(r, value, False, _tail_estimate(increment, previous), half_width)


@dataclass(frozen=True)
class PsiFunction:
    """Ψ(t) = Σ |a'_{ν,j}(t)| over all coefficients of an operator."""

    terms: tuple

    @classmethod
    def from_operator(cls, op) -> "PsiFunction":
        return cls(terms=tuple(op.coeffs[key] for key in sorted(op.coeffs)))

    @property
    def is_zero(self) -> bool:
        return all(term.is_constant for term in self.terms)

    def __call__(self, t: ArrayLike) -> ArrayLike:
        if np.ndim(t) == 0:
            return float(sum(abs(term.prime(t)) for term in self.terms))
        total = np.zeros(np.shape(t))
        for term in self.terms:
            total += np.abs(term.prime(t))
        return total

    def integral(self, a: float, b: float) -> float:
        if self.is_zero or a == b:
            return 0.0
        value, _ = integrate.quad(self, a, b, limit=400, epsabs=1e-14, epsrel=1e-10)
        return value

    def tail_integral(self, t: float) -> float:
        """∫_t^∞ Ψ for t ≥ 0 and ∫_{-∞}^t Ψ for t < 0."""
        if self.is_zero:
            return 0.0
        if t >= 0:
            return self.integral(t, np.inf)
        return self.integral(-np.inf, t)

    def weighted_integral(self, t: float, order: int) -> float:
        """∫ (1+|s|)^order Ψ(s) ds between 0 and t."""
        if self.is_zero or t == 0:
            return 0.0
        lo, hi = sorted((0.0, float(t)))
        value, _ = integrate.quad(lambda s: (1.0 + abs(s)) ** order * self(s), lo, hi, limit=400,
                                  epsabs=1e-14, epsrel=1e-10)
        return value


def psi(op, t: ArrayLike) -> ArrayLike:
    return PsiFunction.from_operator(op)(t)
