"""
Phase functions θ_j(t;ξ) = ∫₀^t φ_j(s;ξ) ds.

θ_j(t;ξ) = |ξ| Θ_j(t;ω), so one table per direction ω serves every |ξ|
on that ray. Tables hold cumulative Gauss–Legendre cell integrals on a
uniform t-grid that grows by doubling when a later time is requested;
the partial cell up to t is integrated on demand.
"""

import logging
from typing import Optional

import numpy as np

from app.config.settings import SpectralConfig
from app.errors import ConvergenceError
from app.spectral.companion import unit_directions
from app.symbol.roots import RootField, roots_batch

logger = logging.getLogger(__name__)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_GL4_NODES, _GL4_WEIGHTS = np.polynomial.legendre.leggauss(4)
_MAX_REFINEMENTS = 6


class _RayTable:
    def __init__(self, roots: RootField, omega: np.ndarray, cell: float, tol: float):
        self._roots = roots
        self._omega = omega
        self._cell = cell
        self._tol = tol
        self._cells = 0
        self._forward = np.zeros((1, roots.op.m))
        self._backward = np.zeros((1, roots.op.m))

    def _branches(self, t: np.ndarray) -> np.ndarray:
        return roots_batch(self._roots.op, t, self._omega, self._roots.config)

    def _cell_integrals(self, starts: np.ndarray, width: float, nodes, weights) -> np.ndarray:
        t = starts[:, None] + 0.5 * width * (1.0 + nodes[None, :])
        values = self._branches(t)
        return 0.5 * width * np.einsum("g,cgm->cm", weights, values)

    def _grow(self, cells: int):
        # Refine the cell width until 8- and 4-point rules agree on every cell.
        for _ in range(_MAX_REFINEMENTS):
            starts = np.arange(cells) * self._cell
            forward = self._cell_integrals(starts, self._cell, _GL_NODES, _GL_WEIGHTS)
            backward = self._cell_integrals(-starts - self._cell, self._cell, _GL_NODES, _GL_WEIGHTS)
            check = self._cell_integrals(starts, self._cell, _GL4_NODES, _GL4_WEIGHTS)
            if np.max(np.abs(check - forward)) <= self._tol * self._cell:
                break
            self._cell *= 0.5
            cells *= 2
        else:
            raise ConvergenceError(f"Phase quadrature failed to reach tolerance {self._tol:g}")
        zero = np.zeros((1, forward.shape[1]))
        self._forward = np.concatenate([zero, np.cumsum(forward, axis=0)])
        self._backward = np.concatenate([zero, -np.cumsum(backward, axis=0)])
        self._cells = cells

    def theta(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        reach = float(np.max(np.abs(t))) if t.size else 0.0
        needed = int(np.ceil(reach / self._cell)) + 1
        if needed > self._cells:
            self._grow(max(needed, 2 * self._cells, 64))

        index = np.floor(np.abs(t) / self._cell).astype(int)
        anchor = np.sign(t) * index * self._cell
        base = np.where(
            (t >= 0)[..., None],
            self._forward[np.minimum(index, self._cells)],
            self._backward[np.minimum(index, self._cells)],
        )
        width = t - anchor
        nodes = anchor[..., None] + 0.5 * width[..., None] * (1.0 + _GL_NODES)
        partial = 0.5 * width[..., None] * np.einsum("g,...gm->...m", _GL_WEIGHTS, self._branches(nodes))
        return base + partial


class PhaseAccumulator:
    def __init__(self, roots: RootField, config: Optional[SpectralConfig] = None):
        self._roots = roots
        self._config = config or SpectralConfig()
        self._tables: dict = {}

    @property
    def quadrature_tol(self) -> float:
        return self._config.quadrature_tol

    def _table(self, omega: np.ndarray) -> _RayTable:
        key = tuple(np.round(omega, 14))
        table = self._tables.get(key)
        if table is None:
            table = _RayTable(self._roots, omega, self._config.phase_cell, self._config.quadrature_tol)
            self._tables[key] = table
        return table

    def unit_theta(self, t, omega) -> np.ndarray:
        """Θ_j(t;ω) for a single unit direction ω and any array of times."""
        omega = np.asarray(omega, dtype=float)
        t = np.asarray(t, dtype=float)
        if self._roots.op.is_constant:
            mu = roots_batch(self._roots.op, 0.0, omega, self._roots.config)
            return t[..., None] * mu
        return self._table(omega).theta(t)

    def theta(self, t: float, xi) -> np.ndarray:
        rho, omega = unit_directions(xi)
        return float(rho) * self.unit_theta(float(t), omega)


def phases(ph: PhaseAccumulator, t: float, xi) -> np.ndarray:
    return ph.theta(t, xi)
