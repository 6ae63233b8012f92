"""
Characteristic roots of the symbol.

Roots come from batched companion-matrix eigenvalues followed by one
Newton polish, sorted strictly decreasing. The sort order is the branch
label: strict hyperbolicity keeps it consistent across (t, ξ).
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from app.coeffs.moments import moment_check
from app.config.settings import CoeffConfig, SymbolConfig
from app.errors import ConfigError, DivergentMoment, NonHyperbolic, RootCollision
from app.symbol.operator import OperatorSpec

logger = logging.getLogger(__name__)


def _horner(coeffs: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Value and derivative of Σ c_i x^{m−i} along the last axis of coeffs."""
    value = np.ones_like(x) * coeffs[..., :1]
    slope = np.zeros_like(x)
    for i in range(1, coeffs.shape[-1]):
        slope = slope * x + value
        value = value * x + coeffs[..., i:i + 1]
    return value, slope


def ordered_roots(
    coeffs: np.ndarray,
    scale: np.ndarray,
    config: SymbolConfig,
    locate: Callable[[int], tuple] = lambda index: (None, None),
) -> np.ndarray:
    """Real roots of monic polynomials (batched on leading axes), descending.

    coeffs has shape (..., m+1); scale (...,) is |ξ| used for tolerances;
    locate maps a flat batch index to the (t, ξ) reported in errors.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    m = coeffs.shape[-1] - 1
    batch = coeffs.shape[:-1]
    flat = coeffs.reshape(-1, m + 1)
    scale = np.broadcast_to(np.asarray(scale, dtype=float), batch).reshape(-1)

    companion = np.zeros((flat.shape[0], m, m))
    companion[:, 0, :] = -flat[:, 1:]
    companion[:, np.arange(1, m), np.arange(m - 1)] = 1.0
    eig = np.linalg.eigvals(companion)

    imag = np.abs(eig.imag)
    bad = imag > config.imag_tol * scale[:, None]
    if np.any(bad):
        index = int(np.argmax(np.any(bad, axis=1)))
        t, xi = locate(index)
        # A conjugate pair this close is a rounded double root.
        if np.max(imag[index]) * 2.0 < config.separation_tol * scale[index]:
            raise RootCollision("Coinciding characteristic roots", t, xi)
        raise NonHyperbolic(
            f"Complex characteristic root (imaginary part {np.max(imag[index]):.3e})", t, xi
        )

    roots = np.sort(eig.real, axis=1)[:, ::-1]
    value, slope = _horner(flat, roots)
    safe = np.abs(slope) > config.separation_tol * scale[:, None] ** (m - 1)
    roots = roots - np.where(safe, value / np.where(safe, slope, 1.0), 0.0)
    roots = np.sort(roots, axis=1)[:, ::-1]

    gaps = roots[:, :-1] - roots[:, 1:]
    collided = gaps < config.separation_tol * scale[:, None]
    if np.any(collided):
        index = int(np.argmax(np.any(collided, axis=1)))
        t, xi = locate(index)
        raise RootCollision(f"Root gap {np.min(gaps[index]):.3e} below separation tolerance", t, xi)
    return roots.reshape(batch + (m,))


def roots_batch(op: OperatorSpec, t, xi: np.ndarray, config: Optional[SymbolConfig] = None) -> np.ndarray:
    """Roots on broadcast (t, ξ) batches; ξ must be nonzero."""
    config = config or SymbolConfig()
    xi = np.asarray(xi, dtype=float)
    t = np.asarray(t, dtype=float)
    coeffs = op.h(t, xi)
    batch = coeffs.shape[:-1]
    scale = np.broadcast_to(np.linalg.norm(xi, axis=-1), batch)
    if np.any(scale == 0):
        raise ConfigError("Characteristic roots requested at xi = 0")
    t_full = np.broadcast_to(t, batch).reshape(-1)
    xi_full = np.broadcast_to(xi, batch + (op.n,)).reshape(-1, op.n)
    return ordered_roots(coeffs, scale, config, lambda i: (float(t_full[i]), xi_full[i]))


def characteristic_roots(op: OperatorSpec, t: float, xi, config: Optional[SymbolConfig] = None) -> np.ndarray:
    return roots_batch(op, float(t), np.asarray(xi, dtype=float), config)


def root_derivatives(op: OperatorSpec, t, xi: np.ndarray, roots: Optional[np.ndarray] = None,
                     config: Optional[SymbolConfig] = None) -> np.ndarray:
    """∂_tφ_k = −Σ a'_{ν,j} φ_k^j ξ^ν / ∏_{r≠k}(φ_k − φ_r) for all k."""
    if roots is None:
        roots = roots_batch(op, t, xi, config)
    numerator, _ = _horner(op.h_prime(t, xi), roots)
    differences = roots[..., :, None] - roots[..., None, :]
    m = roots.shape[-1]
    differences[..., np.arange(m), np.arange(m)] = 1.0
    return -numerator / np.prod(differences, axis=-1)


def root_time_derivative(op: OperatorSpec, t: float, xi, k: int, config: Optional[SymbolConfig] = None) -> float:
    if not 0 <= k < op.m:
        raise ConfigError(f"Root index {k} out of range for m={op.m}")
    return float(root_derivatives(op, float(t), np.asarray(xi, dtype=float), config=config)[k])


def sphere_directions(n: int, samples: int) -> np.ndarray:
    """Quasi-uniform unit vectors: ±1 for n=1, equal angles for n=2, a Fibonacci lattice of samples² points for n=3."""
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if samples < 8:
        raise ConfigError(f"Need at least 8 sphere samples per angular dimension, got {samples}")
    if n == 2:
        angles = 2.0 * np.pi * np.arange(samples) / samples
        return np.stack([np.cos(angles), np.sin(angles)], axis=1)
    count = samples * samples
    k = np.arange(count) + 0.5
    z = 1.0 - 2.0 * k / count
    azimuth = np.pi * (1.0 + 5.0 ** 0.5) * k
    radius = np.sqrt(1.0 - z * z)
    return np.stack([radius * np.cos(azimuth), radius * np.sin(azimuth), z], axis=1)


@dataclass
class RootField:
    op: OperatorSpec
    separation: float
    bound_constant: float
    t_grid: np.ndarray = field(repr=False)
    directions: np.ndarray = field(repr=False)
    config: SymbolConfig = field(default_factory=SymbolConfig, repr=False)

    def roots(self, t, xi) -> np.ndarray:
        return roots_batch(self.op, t, xi, self.config)

    def to_dict(self) -> dict:
        return {
            "operator": self.op.name,
            "separation": self.separation,
            "bound_constant": self.bound_constant,
            "t_min": float(self.t_grid[0]),
            "t_max": float(self.t_grid[-1]),
            "t_points": int(len(self.t_grid)),
            "directions": int(len(self.directions)),
        }


def hyperbolicity_certificate(op: OperatorSpec, t_grid, sphere_samples: int,
                              config: Optional[SymbolConfig] = None) -> RootField:
    config = config or SymbolConfig()
    t_grid = np.asarray(t_grid, dtype=float)
    directions = sphere_directions(op.n, sphere_samples)
    roots = roots_batch(op, t_grid[:, None], directions[None, :, :], config)

    separation = float(np.min(roots[..., :-1] - roots[..., 1:]))
    bound_constant = float(np.max(np.abs(roots)))
    logger.info(
        "Certificate for %s: separation=%.6g, bound=%.6g over %d times x %d directions",
        op.name, separation, bound_constant, len(t_grid), len(directions),
    )
    return RootField(op, separation, bound_constant, t_grid, directions, config)


def default_certificate(op: OperatorSpec, config: Optional[SymbolConfig] = None) -> RootField:
    config = config or SymbolConfig()
    t_grid = np.linspace(config.t_grid_min, config.t_grid_max, config.t_grid_points)
    return hyperbolicity_certificate(op, t_grid, config.sphere_samples, config)


@dataclass
class LimitRoots:
    operator_plus: OperatorSpec
    operator_minus: OperatorSpec
    limit_coeffs: dict
    config: SymbolConfig = field(default_factory=SymbolConfig, repr=False)

    def plus(self, xi) -> np.ndarray:
        return roots_batch(self.operator_plus, 0.0, xi, self.config)

    def minus(self, xi) -> np.ndarray:
        return roots_batch(self.operator_minus, 0.0, xi, self.config)

    def side_roots(self, name: str, xi) -> np.ndarray:
        return roots_batch(self.side(name), 0.0, xi, self.config)

    def side(self, name: str) -> OperatorSpec:
        if name not in ("plus", "minus"):
            raise ConfigError(f"Limit side must be 'plus' or 'minus', got {name!r}")
        return self.operator_plus if name == "plus" else self.operator_minus

    def to_dict(self) -> dict:
        return {
            "limit_coeffs": [
                {"nu": list(nu), "j": j, "plus": plus, "minus": minus}
                for (nu, j), (plus, minus) in sorted(self.limit_coeffs.items())
            ]
        }


def limiting_roots(op: OperatorSpec, config: Optional[SymbolConfig] = None,
                   coeff_config: Optional[CoeffConfig] = None) -> LimitRoots:
    coeff_config = coeff_config or CoeffConfig()
    limits = {}
    for key, expr in op.coeffs.items():
        if expr.is_constant:
            value = expr.eval(0.0)
            limits[key] = (value, value)
            continue
        report = moment_check(expr, 0, coeff_config.moment_tol, coeff_config)
        if not report.converged:
            raise DivergentMoment(f"Derivative of coefficient {expr} is not integrable (moment r=0 diverges)")
        forward, _ = integrate.quad(expr.prime, 0.0, np.inf, limit=400, epsabs=1e-13, epsrel=1e-12)
        backward, _ = integrate.quad(expr.prime, -np.inf, 0.0, limit=400, epsabs=1e-13, epsrel=1e-12)
        at_zero = expr.eval(0.0)
        limits[key] = (at_zero + forward, at_zero - backward)
        logger.debug("Limits of %s: +%.12g / -%.12g", expr, *limits[key])

    plus = op.with_constants({key: value[0] for key, value in limits.items()}, name=f"{op.name}[+inf]")
    minus = op.with_constants({key: value[1] for key, value in limits.items()}, name=f"{op.name}[-inf]")
    return LimitRoots(operator_plus=plus, operator_minus=minus, limit_coeffs=limits, config=config or SymbolConfig())
