"""
First-order reduction and its exact diagonalizer.

With v_j = |ξ|^{m−j−1} D_t^j û the equation becomes D_t v = |ξ| H(t,ω) v,
ω = ξ/|ξ|, where H is the companion matrix of τ^m + H_1 τ^{m−1} + ... + H_m.
Row k of N is the left eigenvector of H for the root μ_k, built from the
Horner coefficients of the characteristic polynomial at μ_k (last entry 1);
columns of N^{-1} are Vandermonde columns divided by p'(μ_k).
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from app.config.settings import SymbolConfig
from app.errors import ConfigError, StepSizeCollapse
from app.symbol.operator import OperatorSpec
from app.symbol.roots import RootField, root_derivatives, roots_batch

logger = logging.getLogger(__name__)


def unit_directions(xi) -> tuple[np.ndarray, np.ndarray]:
    """Split ξ (..., n) into |ξ| and ω = ξ/|ξ|; ξ must be nonzero."""
    xi = np.asarray(xi, dtype=float)
    rho = np.linalg.norm(xi, axis=-1)
    if np.any(rho == 0):
        raise ConfigError("Frequency xi = 0 has no direction")
    return rho, xi / rho[..., None]


class CompanionSystem:
    def __init__(self, op: OperatorSpec, config: Optional[SymbolConfig] = None):
        self.op = op
        self._config = config or SymbolConfig()

    @property
    def m(self) -> int:
        return self.op.m

    def H(self, t, xi) -> np.ndarray:
        _, omega = unit_directions(xi)
        coeffs = self.op.h(t, omega)
        m = self.m
        out = np.zeros(coeffs.shape[:-1] + (m, m))
        out[..., np.arange(m - 1), np.arange(1, m)] = 1.0
        out[..., m - 1, :] = -coeffs[..., :0:-1]
        return out

    def D(self, t, xi) -> np.ndarray:
        _, omega = unit_directions(xi)
        mu = roots_batch(self.op, t, omega, self._config)
        return mu[..., :, None] * np.eye(self.m)


def build_companion(op: OperatorSpec, config: Optional[SymbolConfig] = None) -> CompanionSystem:
    return CompanionSystem(op, config)


@dataclass
class Frame:
    """Diagonalizer data at (t, ω): roots, N, N^{-1}, ∂_tN and root derivatives."""

    mu: np.ndarray
    mu_dot: np.ndarray
    N: np.ndarray
    N_inv: np.ndarray
    dN: np.ndarray


def _left_rows(mu: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    m = mu.shape[-1]
    rows = np.empty(mu.shape + (m,))
    r = np.ones_like(mu)
    rows[..., m - 1] = r
    for j in range(m - 2, -1, -1):
        r = mu * r + coeffs[..., m - 1 - j, None]
        rows[..., j] = r
    return rows


def _left_rows_dot(mu, mu_dot, rows, coeffs_dot) -> np.ndarray:
    m = mu.shape[-1]
    out = np.zeros_like(rows)
    r_dot = np.zeros_like(mu)
    for j in range(m - 2, -1, -1):
        r_dot = mu_dot * rows[..., j + 1] + mu * r_dot + coeffs_dot[..., m - 1 - j, None]
        out[..., j] = r_dot
    return out


def _vandermonde_inverse(mu: np.ndarray) -> np.ndarray:
    m = mu.shape[-1]
    powers = mu[..., None, :] ** np.arange(m)[:, None]
    differences = mu[..., :, None] - mu[..., None, :]
    differences[..., np.arange(m), np.arange(m)] = 1.0
    return powers / np.prod(differences, axis=-1)[..., None, :]


class Diagonalizer:
    def __init__(self, cs: CompanionSystem, roots: RootField):
        self.cs = cs
        self.roots = roots
        self.op = cs.op
        self.det_lower_bound = self._sample_det_bound()

    def _sample_det_bound(self) -> float:
        mu = self.roots.roots(self.roots.t_grid[:, None], self.roots.directions[None, :, :])
        m = mu.shape[-1]
        det = np.ones(mu.shape[:-1])
        for k in range(m):
            for r in range(k + 1, m):
                det *= mu[..., k] - mu[..., r]
        bound = float(np.min(np.abs(det)))
        logger.debug("Diagonalizer det lower bound %.6g on %d samples", bound, det.size)
        return bound

    def frame(self, t, xi) -> Frame:
        _, omega = unit_directions(xi)
        mu = roots_batch(self.op, t, omega, self.roots.config)
        coeffs = self.op.h(t, omega)
        N = _left_rows(mu, coeffs)
        N_inv = _vandermonde_inverse(mu)
        if self.op.is_constant:
            mu_dot = np.zeros_like(mu)
            dN = np.zeros_like(N)
        else:
            mu_dot = root_derivatives(self.op, t, omega, roots=mu)
            dN = _left_rows_dot(mu, mu_dot, N, self.op.h_prime(t, omega))
        return Frame(mu=mu, mu_dot=mu_dot, N=N, N_inv=N_inv, dN=dN)

    def N(self, t, xi) -> np.ndarray:
        return self.frame(t, xi).N

    def N_inv(self, t, xi) -> np.ndarray:
        return self.frame(t, xi).N_inv

    def dN(self, t, xi) -> np.ndarray:
        return self.frame(t, xi).dN


def build_diagonalizer(cs: CompanionSystem, roots: RootField) -> Diagonalizer:
    return Diagonalizer(cs, roots)


def propagate_companion(cs: CompanionSystem, omega, rhos, t_eval, tol: float = 1e-10) -> np.ndarray:
    """Fundamental matrices V(t) of ∂_t V = iρ H(t,ω) V, V(0)=I, for all ρ at once.

    Returns shape (len(t_eval), len(rhos), m, m). t_eval must be sorted away
    from 0 in one direction (all ≥ 0 or all ≤ 0).
    """
    omega = np.asarray(omega, dtype=float)
    rhos = np.atleast_1d(np.asarray(rhos, dtype=float))
    t_eval = np.atleast_1d(np.asarray(t_eval, dtype=float))
    m = cs.m
    count = len(rhos)
    identity = np.broadcast_to(np.eye(m, dtype=complex), (count, m, m))
    out = np.empty((len(t_eval), count, m, m), dtype=complex)

    zero = t_eval == 0.0
    out[zero] = identity
    if np.all(zero):
        return out
    t_end = float(t_eval[np.argmax(np.abs(t_eval))])

    def rhs(t, y):
        V = y.reshape(count, m, m)
        return (1j * rhos[:, None, None] * (cs.H(t, omega) @ V)).reshape(-1)

    solution = integrate.solve_ivp(
        rhs, (0.0, t_end), identity.reshape(-1), method="DOP853",
        t_eval=t_eval[~zero], rtol=tol, atol=tol * 1e-2,
    )
    if solution.status != 0:
        raise StepSizeCollapse(f"Companion integration failed: {solution.message}")
    out[~zero] = solution.y.T.reshape(-1, count, m, m)
    return out
