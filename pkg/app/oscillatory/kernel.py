"""
Windowed dispersive kernels

    I(t,x) = Σ_j ∫ e^{i(x·ξ + θ_j(t;ξ))} n^{lj}(t;ξ) Q_{jk}(t;ξ) |ξ|^{l−k} χ(|ξ|) dξ

(no (2π)^{−n} factor), with Q the amplitude of the z-system. Summing over
every branch j gives the windowed propagator from f_k to D_t^l u; a single
branch isolates one characteristic sheet.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from app.asymint.table import direction_classes, ray_amplitudes
from app.coeffs.moments import PsiFunction
from app.config.settings import AsymintConfig, OscillatoryConfig
from app.errors import ConfigError
from app.oscillatory.cutoff import AnnulusWindow, plateau
from app.oscillatory.quadrature import angular_count, check_budget, panel_count, panel_rule, periodic_nodes
from app.parallel import parallel_map
from app.spectral.companion import Diagonalizer
from app.spectral.phases import PhaseAccumulator

logger = logging.getLogger(__name__)

_BLOCK = 256


def _sphere_rule(n: int, frequency: float, config: OscillatoryConfig) -> tuple[np.ndarray, np.ndarray]:
    """Unit directions and surface weights resolving angular frequency `frequency`."""
    if n == 1:
        return np.array([[1.0], [-1.0]]), np.ones(2)
    count = angular_count(frequency, config.points_per_period, config.angular_nodes)
    azimuth, w_azimuth = periodic_nodes(count)
    if n == 2:
        return np.stack([np.cos(azimuth), np.sin(azimuth)], axis=-1), w_azimuth
    polar_panels = max(1, math.ceil(count / (2 * config.gl_order)))
    polar, w_polar = panel_rule(0.0, math.pi, polar_panels, config.gl_order)
    sin_p = np.sin(polar)
    directions = np.stack([
        np.outer(sin_p, np.cos(azimuth)), np.outer(sin_p, np.sin(azimuth)),
        np.outer(np.cos(polar), np.ones_like(azimuth)),
    ], axis=-1).reshape(-1, 3)
    weights = np.outer(w_polar * sin_p, w_azimuth).reshape(-1)
    return directions, weights


@dataclass
class KernelValue:
    t: float
    x: list
    total: complex
    stationary: Optional[complex] = None  # I₁
    nonstationary: Optional[complex] = None  # I₂

    def to_row(self) -> dict:
        row = {"t": self.t}
        for i, v in enumerate(self.x):
            row[f"x{i + 1}"] = v
        row["abs_I"] = abs(self.total)
        row["arg_I"] = math.atan2(self.total.imag, self.total.real)
        if self.stationary is not None:
            row["abs_I1"] = abs(self.stationary)
            row["abs_I2"] = abs(self.nonstationary)
        return row


class DispersiveKernel:
    """Quadrature of I(t,x) for a fixed set of times and a bound on |x|."""

    def __init__(self, diag: Diagonalizer, ph: PhaseAccumulator, psi: PsiFunction, window: AnnulusWindow,
                 times: Sequence[float], reach: float, l: int = 0, k: int = 0, branch: Optional[int] = None,
                 method: str = "asymptotic", config: Optional[OscillatoryConfig] = None,
                 asymint: Optional[AsymintConfig] = None, threads: int = 1):
        self._config = config or OscillatoryConfig()
        self._asymint = asymint or AsymintConfig()
        self.diag = diag
        self.ph = ph
        self.window = window
        self.times = np.atleast_1d(np.asarray(times, dtype=float))
        op = diag.op
        self.n = op.n
        m = op.m
        if not 0 <= l < m or not 0 <= k < m:
            raise ConfigError(f"Indices l={l}, k={k} must lie in 0..{m - 1}")
        if branch is not None and not 0 <= branch < m:
            raise ConfigError(f"Branch index {branch} out of range for m={m}")
        self.l, self.k = l, k
        self.branches = list(range(m)) if branch is None else [branch]

        bound = diag.roots.bound_constant
        t_reach = float(np.max(np.abs(self.times)))
        radial_frequency = reach + t_reach * bound
        order = self._config.gl_order
        panels = panel_count(radial_frequency, window.outer - window.inner, self._config.points_per_period, order)
        self.rho, self.w_rho = panel_rule(window.inner, window.outer, panels, order)
        self.omega, self.w_omega = _sphere_rule(self.n, window.outer * radial_frequency, self._config)
        check_budget(len(self.rho) * len(self.omega) * len(self.branches), self._config.eval_budget,
                     f"Dispersive kernel up to t={t_reach:g}, |x|={reach:g}")
        self.radial_weight = self.w_rho * window(self.rho) * self.rho ** (self.n - 1)

        # amplitude tables, one per direction class
        classes = direction_classes(op, self.omega)

        def build(entry):
            direction, _ = entry
            return ray_amplitudes(diag, ph, direction, self.rho, self.times, method, self._asymint.t_max,
                                  self._asymint.ode_tol, psi, self._asymint.tail_tol)

        tables = parallel_map(build, classes, threads)
        self._class_of = np.empty(len(self.omega), dtype=int)
        for index, (_, members) in enumerate(classes):
            self._class_of[members] = index
        self._tables = tables
        self._class_directions = np.array([direction for direction, _ in classes])
        logger.info("Kernel quadrature: %d radii x %d directions, %d amplitude tables",
                    len(self.rho), len(self.omega), len(tables))

    def _branch_data(self, time_index: int):
        """Per direction: Θ_j(t;ω) (D, m) and amplitude rows A_j(ρ) (C, R, m) for the chosen (l, k)."""
        t = float(self.times[time_index])
        theta = np.stack([self.ph.unit_theta(t, omega) for omega in self._class_directions])
        n_inv = self.diag.frame(t, self._class_directions).N_inv
        weights = self.rho ** (self.l - self.k)
        amplitudes = []
        for index, table in enumerate(self._tables):
            Q = table.values[time_index]  # (R, m, m) on self.rho
            amplitudes.append(n_inv[index, self.l][None, :] * Q[:, :, self.k] * weights[:, None])
        return theta, np.stack(amplitudes)

    def _gradient_theta(self, theta: np.ndarray) -> np.ndarray:
        """∇_ξ θ_j / |ξ| on the direction nodes, (D, m, n)."""
        if len(self._tables) == 1 or self.n == 1:
            per_direction = theta[self._class_of]
            return per_direction[:, :, None] * self.omega[:, None, :]
        if self.n == 2:
            per_direction = theta[self._class_of]
            step = 2.0 * math.pi / len(self.omega)
            angular = (np.roll(per_direction, -1, axis=0) - np.roll(per_direction, 1, axis=0)) / (2.0 * step)
            normal = np.stack([-self.omega[:, 1], self.omega[:, 0]], axis=-1)
            return per_direction[:, :, None] * self.omega[:, None, :] + angular[:, :, None] * normal[:, None, :]
        raise ConfigError("Stationary splitting of anisotropic kernels is implemented for n ≤ 2")

    def evaluate(self, time_index: int, x, split_radius: Optional[float] = None) -> KernelValue:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ConfigError(f"Point x must have {self.n} components")
        t = float(self.times[time_index])
        theta, amplitudes = self._branch_data(time_index)
        if split_radius is not None:
            if t <= 0 or split_radius <= 0:
                raise ConfigError("Splitting needs t > 0 and r > 0")
            gradient = self._gradient_theta(theta)

        total = 0.0 + 0.0j
        stationary = 0.0 + 0.0j
        for start in range(0, len(self.omega), _BLOCK):
            block = slice(start, start + _BLOCK)
            omega = self.omega[block]
            classes = self._class_of[block]
            projection = omega @ x  # x·ω
            for j in self.branches:
                phase = self.rho[:, None] * (projection[None, :] + theta[classes, j][None, :])
                amplitude = amplitudes[classes, :, j].T  # (R, D)
                integrand = np.exp(1j * phase) * amplitude * self.radial_weight[:, None]
                contribution = integrand @ self.w_omega[block]
                total += np.sum(contribution)
                if split_radius is not None:
                    offset = np.linalg.norm(x[None, :] + gradient[block, j, :], axis=-1) / t
                    cut = plateau(offset, 0.5 * split_radius, split_radius)
                    stationary += np.sum(integrand @ (self.w_omega[block] * cut))

        if split_radius is None:
            return KernelValue(t=t, x=x.tolist(), total=complex(total))
        return KernelValue(t=t, x=x.tolist(), total=complex(total), stationary=complex(stationary),
                           nonstationary=complex(total - stationary))


def dispersive_kernel(diag: Diagonalizer, ph: PhaseAccumulator, psi: PsiFunction, t: float, x,
                      window: AnnulusWindow, l: int = 0, k: int = 0, branch: Optional[int] = None,
                      method: str = "asymptotic", config: Optional[OscillatoryConfig] = None,
                      asymint: Optional[AsymintConfig] = None) -> complex:
    x = np.asarray(x, dtype=float)
    kernel = DispersiveKernel(diag, ph, psi, window, [t], float(np.linalg.norm(x)), l, k, branch, method,
                              config, asymint)
    return kernel.evaluate(0, x).total


def split_kernel(diag: Diagonalizer, ph: PhaseAccumulator, psi: PsiFunction, t: float, x,
                 window: AnnulusWindow, r: float, l: int = 0, k: int = 0, branch: Optional[int] = None,
                 method: str = "asymptotic", config: Optional[OscillatoryConfig] = None,
                 asymint: Optional[AsymintConfig] = None) -> tuple[complex, complex]:
    x = np.asarray(x, dtype=float)
    kernel = DispersiveKernel(diag, ph, psi, window, [t], float(np.linalg.norm(x)), l, k, branch, method,
                              config, asymint)
    value = kernel.evaluate(0, x, split_radius=r)
    return value.stationary, value.nonstationary
