"""
Operator description L(t, D_t, D_x) = D_t^m + Σ a_{ν,j}(t) D_x^ν D_t^j.

The symbol is homogeneous of degree m: every coefficient key (ν, j)
satisfies |ν| + j = m with j ≤ m − 1.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from app.coeffs.expression import ArrayLike, CoeffExpr, constant_coefficient, parse_coefficient
from app.errors import ConfigError

logger = logging.getLogger(__name__)

CoeffKey = tuple  # (nu: tuple[int, ...], j: int)


@dataclass(frozen=True)
class OperatorSpec:
    m: int
    n: int
    coeffs: Mapping[CoeffKey, CoeffExpr]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.m < 2:
            raise ConfigError(f"Operator order must be at least 2, got {self.m}")
        if not 1 <= self.n <= 3:
            raise ConfigError(f"Spatial dimension must be 1, 2 or 3, got {self.n}")
        if not self.coeffs:
            raise ConfigError("Operator has an empty coefficient table")
        for nu, j in self.coeffs:
            if len(nu) != self.n:
                raise ConfigError(f"Multi-index {list(nu)} has length {len(nu)}, expected {self.n}")
            if any(v < 0 for v in nu) or not 0 <= j <= self.m - 1:
                raise ConfigError(f"Invalid coefficient key nu={list(nu)}, j={j}")
            if sum(nu) + j != self.m:
                raise ConfigError(
                    f"Coefficient nu={list(nu)}, j={j} breaks homogeneity: |nu|+j={sum(nu) + j} != m={self.m}"
                )

    @property
    def is_constant(self) -> bool:
        return all(expr.is_constant for expr in self.coeffs.values())

    def is_isotropic(self, samples: int = 24) -> bool:
        """h(t, ω) independent of the unit direction ω (for n=1: of its sign)."""
        t = np.linspace(-10.0, 10.0, 21)[:, None]
        if self.n == 1:
            directions = np.array([[1.0], [-1.0]])
        else:
            rng = np.random.default_rng(0)
            directions = rng.standard_normal((samples, self.n))
            directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        table = self._table(t, directions[None, :, :], derivative=False)
        scale = max(float(np.max(np.abs(table))), 1.0)
        return bool(np.max(np.abs(table - table[:, :1])) <= 1e-12 * scale)

    def _table(self, t: ArrayLike, xi: np.ndarray, derivative: bool) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        t = np.asarray(t, dtype=float)
        shape = np.broadcast_shapes(t.shape, xi.shape[:-1])
        out = np.zeros(shape + (self.m + 1,))
        if not derivative:
            out[..., 0] = 1.0
        for (nu, j), expr in self.coeffs.items():
            value = expr.prime(t) if derivative else expr.eval(t)
            monomial = np.prod(xi ** np.asarray(nu), axis=-1)
            out[..., self.m - j] += value * monomial
        return out

    def h(self, t: ArrayLike, xi: np.ndarray) -> np.ndarray:
        """Monic τ-polynomial coefficients [1, h_1, ..., h_m], h_j = Σ_{|ν|=j} a_{ν,m−j}(t) ξ^ν."""
        return self._table(t, xi, derivative=False)

    def h_prime(self, t: ArrayLike, xi: np.ndarray) -> np.ndarray:
        """Time derivatives of h (leading entry 0)."""
        return self._table(t, xi, derivative=True)

    def with_constants(self, values: Mapping[CoeffKey, float], name: str = "") -> "OperatorSpec":
        coeffs = {key: constant_coefficient(values[key]) for key in self.coeffs}
        return OperatorSpec(m=self.m, n=self.n, coeffs=coeffs, name=name or self.name)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "coeffs": [
                {"nu": list(nu), "j": j, "expr": self.coeffs[(nu, j)].source}
                for nu, j in sorted(self.coeffs)
            ],
        }


def eval_symbol(op: OperatorSpec, t: float, tau: float, xi) -> float:
    """τ^m + Σ a_{ν,j}(t) ξ^ν τ^j."""
    coefficients = op.h(t, np.asarray(xi, dtype=float))
    return float(np.polyval(coefficients, tau))


def operator_from_dict(data: Mapping, name: str = "") -> OperatorSpec:
    try:
        m = int(data["m"])
        n = int(data["n"])
        entries = data["coeffs"]
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"Malformed operator description: {e}") from e
    if not isinstance(entries, list):
        raise ConfigError("Operator 'coeffs' must be a list")

    coeffs = {}
    for entry in entries:
        try:
            nu = tuple(int(v) for v in entry["nu"])
            j = int(entry["j"])
            source = str(entry["expr"])
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"Malformed coefficient entry {entry!r}: {e}") from e
        if (nu, j) in coeffs:
            raise ConfigError(f"Duplicate coefficient nu={list(nu)}, j={j}")
        coeffs[(nu, j)] = parse_coefficient(source)
    return OperatorSpec(m=m, n=n, coeffs=coeffs, name=name)


def load_operator(path: str, name: Optional[str] = None) -> OperatorSpec:
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Cannot read operator file {path}: {e}") from e
    op = operator_from_dict(data, name=name or path)
    logger.info("Loaded operator %s (m=%d, n=%d, %d coefficients)", op.name, op.m, op.n, len(op.coeffs))
    return op
