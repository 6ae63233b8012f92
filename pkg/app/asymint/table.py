"""
Amplitude tables Q(t; ρω) on radial nodes, one table per direction class.

Q varies slowly in ρ once the oscillating factors e^{iρΘ} are divided out,
so a table on a modest radial grid is spline-interpolated onto dense
frequency sets (FFT lattices, quadrature nodes).
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import interpolate

from app.coeffs.moments import PsiFunction
from app.errors import ConfigError
from app.spectral.companion import Diagonalizer, propagate_companion
from app.spectral.phases import PhaseAccumulator
from app.asymint.levinson import extract_profiles, integrate_ray

logger = logging.getLogger(__name__)

METHODS = ("asymptotic", "direct")


@dataclass
class RayAmplitudes:
    omega: np.ndarray
    rhos: np.ndarray
    times: np.ndarray
    values: np.ndarray  # (T, R, m, m)

    def at(self, time_index: int, rho_query) -> np.ndarray:
        """Q at the requested radii for one table time, shape (P, m, m)."""
        rho_query = np.asarray(rho_query, dtype=float)
        table = self.values[time_index]
        if len(self.rhos) < 4:
            index = np.searchsorted(self.rhos, rho_query)
            index = np.clip(index, 0, len(self.rhos) - 1)
            if not np.allclose(self.rhos[index], rho_query, rtol=1e-12, atol=0.0):
                raise ConfigError("Radial table too short to interpolate")
            return table[index]
        clipped = np.clip(rho_query, self.rhos[0], self.rhos[-1])
        real = interpolate.CubicSpline(self.rhos, table.real, axis=0)(clipped)
        imag = interpolate.CubicSpline(self.rhos, table.imag, axis=0)(clipped)
        return real + 1j * imag


def _signed_batches(times: np.ndarray):
    """Index sets for t ≥ 0 in increasing and t < 0 in decreasing order."""
    forward = np.flatnonzero(times >= 0)
    forward = forward[np.argsort(times[forward])]
    backward = np.flatnonzero(times < 0)
    backward = backward[np.argsort(-times[backward])]
    return forward, backward


def _direct_values(diag: Diagonalizer, ph: PhaseAccumulator, omega, rhos, times, tol: float) -> np.ndarray:
    m = diag.op.m
    V = np.empty((len(times), len(rhos), m, m), dtype=complex)
    for index in _signed_batches(times):
        if len(index):
            V[index] = propagate_companion(diag.cs, omega, rhos, times[index], tol)
    # Q = Φ^{-1} N V removes the fast phases from the fundamental matrix.
    N = diag.frame(times, omega).N
    theta = ph.unit_theta(times, omega)
    demod = np.exp(-1j * rhos[None, :, None] * theta[:, None, :])
    return demod[..., None] * (N[:, None] @ V)


def ray_amplitudes(diag: Diagonalizer, ph: PhaseAccumulator, omega, rhos, times, method: str,
                   t_profile: float, tol: float, psi: Optional[PsiFunction] = None,
                   tail_tol: float = 1e-6) -> RayAmplitudes:
    if method not in METHODS:
        raise ConfigError(f"Unknown method '{method}', expected one of {', '.join(METHODS)}")
    omega = np.asarray(omega, dtype=float)
    rhos = np.sort(np.atleast_1d(np.asarray(rhos, dtype=float)))
    times = np.atleast_1d(np.asarray(times, dtype=float))
    m = diag.op.m

    if diag.op.is_constant:
        initial = diag.frame(0.0, omega).N.astype(complex)
        values = np.broadcast_to(initial, (len(times), len(rhos), m, m)).copy()
        return RayAmplitudes(omega, rhos, times, values)

    if method == "direct":
        values = _direct_values(diag, ph, omega, rhos, times, tol)
        return RayAmplitudes(omega, rhos, times, values)

    reach = float(np.max(np.abs(times))) if times.size else 0.0
    horizon = min(t_profile, reach) if reach > 0 else t_profile
    trajectory = integrate_ray(diag, ph, omega, rhos, horizon, tol)
    if reach > horizon and psi is not None:
        # certifies the α_± used beyond the integrated range
        extract_profiles(trajectory, psi, tail_tol)
    values = np.empty((len(times), len(rhos), m, m), dtype=complex)
    for i, t in enumerate(times):
        clipped = float(np.clip(t, -horizon, horizon))
        values[i] = trajectory.Q(clipped)
    logger.debug("Amplitude table on %d radii, %d times, horizon %g", len(rhos), len(times), horizon)
    return RayAmplitudes(omega, rhos, times, values)


def direction_classes(op, xi_points, decimals: int = 12) -> list[tuple[np.ndarray, np.ndarray]]:
    """Group nonzero frequencies (P, n) into rays sharing Q; returns (ω, indices) pairs.

    Isotropic operators need one ray for every frequency; otherwise each
    distinct direction is its own class.
    """
    xi_points = np.asarray(xi_points, dtype=float)
    rho = np.linalg.norm(xi_points, axis=-1)
    if np.any(rho == 0):
        raise ConfigError("Direction classes are defined for nonzero frequencies only")
    if op.is_isotropic():
        reference = np.zeros(op.n)
        reference[0] = 1.0
        return [(reference, np.arange(len(xi_points)))]
    omega = np.round(xi_points / rho[:, None], decimals)
    unique, inverse = np.unique(omega, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    logger.warning("Operator is anisotropic: %d direction classes for %d frequencies", len(unique), len(xi_points))
    classes = []
    for index, direction in enumerate(unique):
        members = np.flatnonzero(inverse == index)
        classes.append((direction / np.linalg.norm(direction), members))
    return classes
