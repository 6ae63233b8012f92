"""
Graph charts of Σ_φ, contact orders of tangent lines and Sugimoto indices.

At σ ∈ Σ_φ a Householder reflection R sends e_n to the unit normal ν, and
Σ_φ is locally {R(y₀ + y, h(y))} with h(0) = σ·ν and ∇h(0) = 0. Section
curves through a plane P ∋ ν are g(r) = h(r u) for a tangent unit vector u.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize

from app.config.settings import GeometryConfig
from app.errors import ConfigError, GeometryError
from app.geometry.phase import HomogeneousPhase, trace_point
from app.symbol.roots import sphere_directions

logger = logging.getLogger(__name__)


def householder(normal: np.ndarray) -> np.ndarray:
    """Symmetric orthogonal R with R e_n = normal."""
    n = len(normal)
    e_n = np.zeros(n)
    e_n[-1] = 1.0
    v = e_n - normal
    size = float(v @ v)
    if size < 1e-28:
        return np.eye(n)
    return np.eye(n) - 2.0 * np.outer(v, v) / size


class GraphChart:
    def __init__(self, phase: HomogeneousPhase, sigma: np.ndarray, config: Optional[GeometryConfig] = None):
        self._config = config or GeometryConfig()
        self.phase = phase
        self.sigma = np.asarray(sigma, dtype=float)
        gradient = phase.gradient(self.sigma)
        size = float(np.linalg.norm(gradient))
        if not np.isfinite(size) or size <= 1e-12:
            raise GeometryError(f"Chart breakdown at sigma={self.sigma.tolist()}: degenerate normal")
        self.normal = gradient / size
        self.rotation = householder(self.normal)
        local = self.rotation @ self.sigma
        self.offset = local[:-1]
        self.height = float(local[-1])
        if self.height <= 0:
            raise GeometryError(f"Chart breakdown at sigma={self.sigma.tolist()}: normal points inward")

    @property
    def n(self) -> int:
        return len(self.sigma)

    @property
    def reach(self) -> float:
        """Half the fitting radius; F built on this chart stays well inside it."""
        return 0.5 * self._config.chart_radius * self.height

    def point(self, y, h) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        h = np.asarray(h, dtype=float)
        local = np.concatenate([self.offset + y, h[..., None]], axis=-1)
        return local @ self.rotation  # R is symmetric

    def __call__(self, y) -> np.ndarray:
        """h(y) for y of shape (..., n−1), by Newton iteration on φ(R(y₀+y, h)) = 1."""
        y = np.asarray(y, dtype=float)
        start = np.full(y.shape[:-1], self.height)
        step = 1e-7 * self.height

        def residual(h):
            return self.phase(self.point(y, h)) - 1.0

        def slope(h):
            return (self.phase(self.point(y, h + step)) - self.phase(self.point(y, h - step))) / (2.0 * step)

        try:
            return optimize.newton(residual, start, fprime=slope, tol=1e-12 * self.height, maxiter=100)
        except RuntimeError as e:
            raise GeometryError(f"Chart breakdown at sigma={self.sigma.tolist()}: {e}") from e

    def tangent(self, direction) -> np.ndarray:
        """Chart coordinates of a tangent vector given in ξ-space."""
        direction = np.asarray(direction, dtype=float)
        local = self.rotation @ direction
        if abs(local[-1]) > 1e-8 * max(np.linalg.norm(direction), 1.0):
            raise ConfigError("Plane direction is not tangent to the level set")
        return local[:-1] / np.linalg.norm(local[:-1])

    def section_taylor(self, u, order: int) -> np.ndarray:
        """Taylor coefficients g_k = g^{(k)}(0)/k!, k = 0..order, of g(r) = h(r u)."""
        u = np.asarray(u, dtype=float)
        radius = self._config.chart_radius * self.height
        count = self._config.fit_points
        r = radius * np.cos(np.pi * (np.arange(count) + 0.5) / count)
        values = self(r[:, None] * u[None, :])
        degree = max(self._config.fit_degree, order + 2)
        fit = np.polynomial.Chebyshev.fit(r, values, degree, domain=[-radius, radius])
        coefficients = fit.convert(kind=np.polynomial.Polynomial, domain=[-radius, radius],
                                   window=[-radius, radius]).coef
        return np.pad(coefficients, (0, max(0, order + 1 - len(coefficients))))[: order + 1]


def graph_chart(phase: HomogeneousPhase, sigma, config: Optional[GeometryConfig] = None) -> GraphChart:
    return GraphChart(phase, sigma, config)


def section_contact_order(chart: GraphChart, u, gamma_max: int, threshold: float) -> Optional[int]:
    """First k ≥ 2 with |g_k| h(0)^{k−1} above threshold; None beyond gamma_max."""
    coefficients = chart.section_taylor(u, gamma_max)
    for k in range(2, gamma_max + 1):
        if abs(coefficients[k]) * chart.height ** (k - 1) > threshold:
            return k
    return None


def contact_order(phase: HomogeneousPhase, sigma, plane=None, gamma_max: int = 8,
                  config: Optional[GeometryConfig] = None) -> Optional[int]:
    """Contact order of T_σ∩P with Σ_φ∩P; plane is a tangent direction (ignored for n=2)."""
    config = config or GeometryConfig()
    if gamma_max < 2:
        raise ConfigError(f"gamma_max must be at least 2, got {gamma_max}")
    chart = GraphChart(phase, sigma, config)
    if chart.n == 2:
        u = np.array([1.0])
    elif plane is None:
        raise ConfigError("A tangent direction is required to choose the plane for n=3")
    else:
        u = chart.tangent(plane)
    return section_contact_order(chart, u, gamma_max, config.noise_threshold)


def chart_hessian(chart: GraphChart) -> np.ndarray:
    """∇²h(0) from second-order section coefficients."""
    if chart.n == 2:
        return np.array([[2.0 * chart.section_taylor(np.array([1.0]), 2)[2]]])
    e1, e2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    diagonal = (e1 + e2) / np.sqrt(2.0)
    h11 = 2.0 * chart.section_taylor(e1, 2)[2]
    h22 = 2.0 * chart.section_taylor(e2, 2)[2]
    hdd = 2.0 * chart.section_taylor(diagonal, 2)[2]
    h12 = hdd - 0.5 * (h11 + h22)
    return np.array([[h11, h12], [h12, h22]])


# ─── Indices ──────────────────────────────────────────────────────


@dataclass
class ContactReport:
    points: list
    per_point: list
    convex: bool
    gamma: int
    gamma0: int
    hessian_max: float = 0.0  # largest scaled Hessian eigenvalue seen
    label: str = ""

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "convex": self.convex,
            "gamma": self.gamma,
            "gamma0": self.gamma0,
            "hessian_max": self.hessian_max,
            "points": [
                {"sigma": sigma, "orders": orders} for sigma, orders in zip(self.points, self.per_point)
            ],
        }


def plane_directions(chart: GraphChart, samples: int) -> np.ndarray:
    """Tangent unit vectors in chart coordinates for planes rotated about the normal over [0, π)."""
    if chart.n == 2:
        return np.array([[1.0]])
    angles = np.pi * np.arange(samples) / samples
    return np.stack([np.cos(angles), np.sin(angles)], axis=1)


def sugimoto_indices(phase: HomogeneousPhase, config: Optional[GeometryConfig] = None,
                     sphere_samples: Optional[int] = None, plane_samples: Optional[int] = None,
                     gamma_max: Optional[int] = None) -> ContactReport:
    config = config or GeometryConfig()
    sphere_samples = sphere_samples or config.sphere_samples
    plane_samples = plane_samples or config.plane_samples
    gamma_max = gamma_max or config.gamma_max
    if phase.n not in (2, 3):
        raise ConfigError(f"Sugimoto indices need n in {{2, 3}}, got {phase.n}")

    points, per_point = [], []
    convex = True
    hessian_max = -np.inf
    for direction in sphere_directions(phase.n, sphere_samples):
        sigma = trace_point(phase, direction)
        chart = GraphChart(phase, sigma, config)
        orders = []
        for u in plane_directions(chart, plane_samples):
            order = section_contact_order(chart, u, gamma_max, config.noise_threshold)
            if order is None:
                raise GeometryError(
                    f"Contact order exceeds gamma_max={gamma_max} at sigma={sigma.tolist()} for '{phase.label}'"
                )
            orders.append(order)
        eigenvalues = np.linalg.eigvalsh(chart_hessian(chart)) * chart.height
        hessian_max = max(hessian_max, float(np.max(eigenvalues)))
        if np.max(eigenvalues) > config.hessian_tol:
            convex = False
        points.append(sigma.tolist())
        per_point.append(orders)

    gamma = max(max(orders) for orders in per_point)
    gamma0 = max(min(orders) for orders in per_point)
    logger.debug("Indices of '%s': gamma=%d gamma0=%d convex=%s", phase.label, gamma, gamma0, convex)
    return ContactReport(points=points, per_point=per_point, convex=convex, gamma=gamma, gamma0=gamma0,
                         hessian_max=hessian_max, label=phase.label)
