"""
Model oscillatory integrals I(λ,ν) = ∫ e^{iλF(x,ν)} a(x,ν) χ(x) dx, x ∈ ℝ^N, N ∈ {1, 2}.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from app.config.settings import OscillatoryConfig
from app.errors import ConfigError
from app.geometry.contact import GraphChart
from app.oscillatory.cutoff import plateau
from app.oscillatory.quadrature import angular_count, check_budget, panel_count, panel_rule, periodic_nodes

logger = logging.getLogger(__name__)

CUTOFFS = ("bump", "gaussian")
_GAUSSIAN_RADIUS = 6.0
_SAMPLE_RADII = 400
_SAMPLE_ANGLES = 64


@dataclass
class ModelIntegral:
    phase: Callable[[np.ndarray, Any], np.ndarray]
    gamma: int
    N: int = 1
    amplitude: Optional[Callable[[np.ndarray, Any], np.ndarray]] = None
    cutoff: str = "bump"
    delta: float = 2.0  # bump: χ = 1 on |x| ≤ δ/4, 0 on |x| ≥ δ/2
    label: str = ""
    _slopes: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if self.N not in (1, 2):
            raise ConfigError(f"Model integrals are implemented for N in {{1, 2}}, got {self.N}")
        if self.cutoff not in CUTOFFS:
            raise ConfigError(f"Unknown cutoff '{self.cutoff}', expected one of {', '.join(CUTOFFS)}")
        if self.gamma < 2:
            raise ConfigError(f"gamma must be at least 2, got {self.gamma}")
        if self.delta <= 0:
            raise ConfigError(f"delta must be positive, got {self.delta}")

    @property
    def radius(self) -> float:
        return 0.5 * self.delta if self.cutoff == "bump" else _GAUSSIAN_RADIUS

    def chi(self, r) -> np.ndarray:
        r = np.abs(np.asarray(r, dtype=float))
        if self.cutoff == "bump":
            return plateau(r, 0.25 * self.delta, 0.5 * self.delta)
        return np.where(r <= _GAUSSIAN_RADIUS, np.exp(-r * r), 0.0)

    def F(self, x, nu=None) -> np.ndarray:
        return np.asarray(self.phase(np.asarray(x, dtype=float), nu), dtype=float)

    def a(self, x, nu=None) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.amplitude is None:
            return np.ones(x.shape[:-1])
        return np.asarray(self.amplitude(x, nu))

    def slopes(self, nu=None) -> tuple[float, float]:
        """Sampled max |∂_ρF| and max |∂_ϕF| (angular, N=2) on the support."""
        key = repr(nu)
        if key in self._slopes:
            return self._slopes[key]
        R = self.radius
        if self.N == 1:
            x = np.linspace(-R, R, 2 * _SAMPLE_RADII + 1)
            values = self.F(x[:, None], nu)
            result = (float(np.max(np.abs(np.gradient(values, x)))), 0.0)
        else:
            rho = np.linspace(0.0, R, _SAMPLE_RADII + 1)
            angles, _ = periodic_nodes(_SAMPLE_ANGLES)
            omega = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
            values = self.F(rho[:, None, None] * omega[None, :, :], nu)
            radial = np.gradient(values, rho, axis=0)
            angular = (np.roll(values, -1, axis=1) - np.roll(values, 1, axis=1)) / (2.0 * angles[1])
            result = (float(np.max(np.abs(radial))), float(np.max(np.abs(angular))))
        self._slopes[key] = result
        return result

    @classmethod
    def power_phase(cls, gamma: int, N: int = 1, cutoff: str = "bump", delta: float = 2.0) -> "ModelIntegral":
        """F(x) = x^γ (N=1) or |x|^γ (N=2)."""
        if N == 1:
            def phase(x, nu):
                return x[..., 0] ** gamma
        else:
            def phase(x, nu):
                return np.sum(x * x, axis=-1) ** (0.5 * gamma)
        return cls(phase=phase, gamma=gamma, N=N, cutoff=cutoff, delta=delta, label=f"|x|^{gamma}")

    @classmethod
    def from_chart(cls, chart: GraphChart, gamma: int, z=None, delta: Optional[float] = None,
                   cutoff: str = "bump") -> "ModelIntegral":
        """F(x) = h(x+z) − h(z) − ∇h(z)·x for the graph h of a chart."""
        dim = chart.n - 1
        z = np.zeros(dim) if z is None else np.asarray(z, dtype=float)
        step = 1e-5 * chart.height
        gradient = np.array([
            (float(chart(z + step * e)) - float(chart(z - step * e))) / (2.0 * step) for e in np.eye(dim)
        ])
        base = float(chart(z))
        delta = delta if delta is not None else chart.reach

        def phase(x, nu):
            return chart(z + x) - base - x @ gradient

        return cls(phase=phase, gamma=gamma, N=dim, cutoff=cutoff, delta=delta, label=f"chart@{chart.sigma.tolist()}")


def eval_model(mi: ModelIntegral, lam: float, nu=None, config: Optional[OscillatoryConfig] = None,
               refine: int = 1) -> complex:
    config = config or OscillatoryConfig()
    if lam < 0:
        raise ConfigError(f"lambda must be non-negative, got {lam}")
    R = mi.radius
    radial_slope, angular_slope = mi.slopes(nu)
    order = config.gl_order

    if mi.N == 1:
        panels = panel_count(lam * radial_slope, 2.0 * R, config.points_per_period, order, refine)
        check_budget(panels * order, config.eval_budget, f"Model integral at lambda={lam:g}")
        x, w = panel_rule(-R, R, panels, order)
        points = x[:, None]
        integrand = np.exp(1j * lam * mi.F(points, nu)) * mi.a(points, nu) * mi.chi(x)
        return complex(np.sum(w * integrand))

    panels = panel_count(lam * radial_slope, R, config.points_per_period, order, refine)
    count = angular_count(lam * angular_slope, config.points_per_period, config.angular_nodes, refine)
    check_budget(panels * order * count, config.eval_budget, f"Model integral at lambda={lam:g}")
    rho, w_rho = panel_rule(0.0, R, panels, order)
    angles, w_angle = periodic_nodes(count)
    omega = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    points = rho[:, None, None] * omega[None, :, :]
    integrand = np.exp(1j * lam * mi.F(points, nu)) * mi.a(points, nu) * (mi.chi(rho) * rho)[:, None]
    return complex(np.einsum("r,a,ra->", w_rho, w_angle, integrand))


def self_convergence(mi: ModelIntegral, lam: float, nu=None, config: Optional[OscillatoryConfig] = None) -> float:
    """Relative change of I when every panel and angular count is doubled."""
    coarse = eval_model(mi, lam, nu, config)
    fine = eval_model(mi, lam, nu, config, refine=2)
    return abs(fine - coarse) / max(abs(fine), 1e-300)


# ─── Phase conditions ─────────────────────────────────────────────


@dataclass
class PhaseConditionReport:
    f1: bool  # F(0) = 0 and ∇F(0) = 0
    f2: bool  # Σ_{j=2}^γ |a_j(ω)| ≥ C > 0
    f3: bool  # |∂_ρF(ρω)| increasing on (0, radius)
    f4: bool  # derivatives up to γ+1 bounded
    constant: float
    derivative_bound: float
    taylor: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.f1 and self.f2 and self.f3 and self.f4

    def to_dict(self) -> dict:
        return {
            "f1": self.f1, "f2": self.f2, "f3": self.f3, "f4": self.f4, "holds": self.holds,
            "constant": self.constant, "derivative_bound": self.derivative_bound, "taylor": self.taylor,
        }


def check_phase_conditions(mi: ModelIntegral, nu=None, directions: int = 16, tol: float = 1e-8,
                           fit_points: int = 41, fit_degree: int = 20) -> PhaseConditionReport:
    R = mi.radius
    if mi.N == 1:
        units = np.array([[1.0]])
    else:
        angles = math.pi * np.arange(directions) / directions
        units = np.stack([np.cos(angles), np.sin(angles)], axis=-1)

    s_fit = R * np.cos(math.pi * (np.arange(fit_points) + 0.5) / fit_points)
    s_check = np.linspace(R / 400.0, R, 400)
    degree = max(fit_degree, mi.gamma + 3)

    f1 = f3 = True
    constant = math.inf
    bound = 0.0
    taylor = []
    for u in units:
        values = mi.F(s_fit[:, None] * u[None, :], nu)
        fit = np.polynomial.Chebyshev.fit(s_fit, values, degree, domain=[-R, R])
        coefficients = fit.convert(kind=np.polynomial.Polynomial, domain=[-R, R], window=[-R, R]).coef
        coefficients = np.pad(coefficients, (0, max(0, mi.gamma + 2 - len(coefficients))))
        scale = max(float(np.max(np.abs(values))), 1.0)
        if abs(coefficients[0]) > tol * scale or abs(coefficients[1]) * R > tol * scale:
            f1 = False
        constant = min(constant, float(np.sum(np.abs(coefficients[2: mi.gamma + 1]))))
        taylor.append([float(c) for c in coefficients[2: mi.gamma + 1]])

        derivative = fit.deriv()
        for side in (s_check, -s_check):
            magnitude = np.abs(derivative(side))
            if np.any(np.diff(magnitude) < -tol * max(float(np.max(magnitude)), 1.0)):
                f3 = False
        for k in range(1, mi.gamma + 2):
            bound = max(bound, float(np.max(np.abs(fit.deriv(k)(s_fit)))))

    f2 = constant > tol
    f4 = math.isfinite(bound)
    logger.debug("Phase conditions for '%s': F1=%s F2=%s (C=%.3g) F3=%s F4=%s", mi.label, f1, f2, constant, f3, f4)
    return PhaseConditionReport(f1=f1, f2=f2, f3=f3, f4=f4, constant=constant, derivative_bound=bound, taylor=taylor)
