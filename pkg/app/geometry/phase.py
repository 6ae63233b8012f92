"""
Positive degree-one homogeneous phases φ and their level sets Σ_φ = {φ = 1}.

A phase is either a root branch of a limiting operator (after the linear
shift that makes it positive) or P^{1/d} for a positive homogeneous
polynomial P of degree d given as an expression in xi1..xin.
"""

import logging
from typing import Callable, Optional

import numpy as np

from app.coeffs.expression import evaluate_node, parse_expression
from app.config.settings import GeometryConfig, SymbolConfig
from app.errors import ConfigError, GeometryError
from app.symbol.operator import OperatorSpec
from app.symbol.roots import LimitRoots, roots_batch, sphere_directions

logger = logging.getLogger(__name__)


class HomogeneousPhase:
    def __init__(self, func: Callable[[np.ndarray], np.ndarray], n: int, label: str = ""):
        self._func = func
        self.n = n
        self.label = label

    def __call__(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        if xi.shape[-1] != self.n:
            raise ConfigError(f"Phase '{self.label}' expects {self.n} components, got {xi.shape[-1]}")
        return self._func(xi)

    def gradient(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        step = 1e-6 * max(float(np.linalg.norm(xi)), 1e-300)
        out = np.empty(self.n)
        for i in range(self.n):
            e = np.zeros(self.n)
            e[i] = step
            out[i] = (float(self(xi + e)) - float(self(xi - e))) / (2.0 * step)
        return out

    def scaled(self, factor: float) -> "HomogeneousPhase":
        if factor <= 0:
            raise ConfigError(f"Scale factor must be positive, got {factor}")
        return HomogeneousPhase(lambda xi: factor * self._func(xi), self.n, f"{factor:g}*{self.label}")

    def rotated(self, rotation) -> "HomogeneousPhase":
        """φ∘R, whose level set is R^T Σ_φ."""
        rotation = np.asarray(rotation, dtype=float)
        return HomogeneousPhase(lambda xi: self._func(xi @ rotation.T), self.n, f"{self.label}∘R")

    def homogeneity_defect(self, directions: np.ndarray, scales=(0.5, 2.0, 7.0)) -> float:
        base = self(directions)
        worst = 0.0
        for s in scales:
            worst = max(worst, float(np.max(np.abs(self(s * directions) - s * base) / (s * np.abs(base)))))
        return worst

    @classmethod
    def from_polynomial(cls, source: str, n: int, config: Optional[GeometryConfig] = None) -> "HomogeneousPhase":
        """φ = P^{1/d} for a positive homogeneous polynomial P in xi1..xin."""
        config = config or GeometryConfig()
        if n not in (1, 2, 3):
            raise ConfigError(f"Dimension n must be 1, 2 or 3, got {n}")
        names = tuple(f"xi{i + 1}" for i in range(n))
        ast = parse_expression(source, names)

        def polynomial(xi):
            return evaluate_node(ast, [xi[..., i] for i in range(n)])

        directions = sphere_directions(n, max(8, min(config.sphere_samples, 32)))
        values = np.broadcast_to(polynomial(directions), directions.shape[:-1])
        if np.any(values <= 0):
            raise GeometryError(f"Polynomial phase '{source}' is not positive on the unit sphere")
        ratios = np.log2(np.broadcast_to(polynomial(2.0 * directions), values.shape) / values)
        degree = int(round(float(np.mean(ratios))))
        if degree < 1 or np.max(np.abs(ratios - degree)) > 1e-8:
            raise GeometryError(f"Polynomial phase '{source}' is not homogeneous")

        def phase(xi):
            values = np.broadcast_to(polynomial(xi), xi.shape[:-1])
            return np.power(np.maximum(values, 0.0), 1.0 / degree)

        logger.debug("Polynomial phase %r of degree %d", source, degree)
        return cls(phase, n, label=source)

    @classmethod
    def from_branch(cls, op: OperatorSpec, k: int, shift=None, sign: float = 1.0,
                    config: Optional[SymbolConfig] = None, label: str = "") -> "HomogeneousPhase":
        """sign·(φ_k(ξ) − shift·ξ) for the constant-coefficient operator op."""
        if not 0 <= k < op.m:
            raise ConfigError(f"Branch index {k} out of range for m={op.m}")
        shift = np.zeros(op.n) if shift is None else np.asarray(shift, dtype=float)
        config = config or SymbolConfig()

        def phase(xi):
            roots = roots_batch(op, 0.0, xi, config)[..., k]
            return sign * (roots - xi @ shift)

        return cls(phase, op.n, label=label or f"{op.name or 'op'}[{k}]")


def trace_point(phase: HomogeneousPhase, direction) -> np.ndarray:
    direction = np.asarray(direction, dtype=float)
    if not np.any(direction):
        raise ConfigError("Direction must be nonzero")
    value = float(phase(direction))
    if value <= 0:
        raise GeometryError(f"Phase '{phase.label}' is not positive in direction {direction.tolist()}")
    return direction / value


# ─── Linear shift of limiting branches ────────────────────────────


def _middle_indices(m: int) -> tuple:
    if m % 2 == 0:
        return (m // 2 - 1, m // 2)
    return ((m - 1) // 2,)


def linear_shift(limit_roots: LimitRoots, k: int, side: str = "plus",
                 config: Optional[GeometryConfig] = None) -> HomogeneousPhase:
    """Positive phase ±(φ_k − α) with α the linear part of the mid-gap roots."""
    config = config or GeometryConfig()
    op = limit_roots.side(side)
    if not 0 <= k < op.m:
        raise ConfigError(f"Branch index {k} out of range for m={op.m}")
    middle = list(_middle_indices(op.m))
    axes = np.eye(op.n)
    mid_plus = np.mean(limit_roots.side_roots(side, axes)[:, middle], axis=-1)
    mid_minus = np.mean(limit_roots.side_roots(side, -axes)[:, middle], axis=-1)
    shift = 0.5 * (mid_plus - mid_minus)

    label = f"{side}[{k}]"
    raw = HomogeneousPhase.from_branch(op, k, shift, 1.0, limit_roots.config, label)
    directions = sphere_directions(op.n, config.sphere_samples)
    values = raw(directions)
    if np.all(values > 0):
        sign = 1.0
    elif np.all(values < 0):
        sign = -1.0
    else:
        raise GeometryError(f"Shifted branch {label} is not sign-definite on the unit sphere")
    logger.debug("Branch %s: shift %s, sign %+.0f", label, shift.tolist(), sign)
    return HomogeneousPhase.from_branch(op, k, shift, sign, limit_roots.config, label)
