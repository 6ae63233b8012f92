"""
Spectral solution of L(t, D_t, D_x)u = 0, D_t^k u(0) = f_k, on a periodic grid.

Every nonzero lattice frequency is evaluated through

    D_t^l û(t,ξ) = Σ_{j,k} e^{iθ_j(t;ξ)} n^{lj}(t;ξ) Q_{jk}(t;ξ) |ξ|^{l−k} f̂_k(ξ),

where Q is the phase-free amplitude read from a radial table on the
frequency's direction class. The asymptotic method takes Q from the
z-system profiles; direct_ode integrates the companion system and divides
the fast phases out. ξ = 0 uses the exact polynomial evolution.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from app.asymint.table import direction_classes, ray_amplitudes
from app.cauchy.grid import CauchyData, SpectralGrid
from app.coeffs.moments import PsiFunction
from app.config.settings import AsymintConfig, CauchyConfig, SpectralConfig
from app.errors import CertificateMissing, ConfigError
from app.parallel import parallel_map
from app.spectral.companion import build_companion, build_diagonalizer
from app.spectral.phases import PhaseAccumulator
from app.symbol.operator import OperatorSpec
from app.symbol.roots import RootField

logger = logging.getLogger(__name__)

SOLVE_METHODS = {"asymptotic": "asymptotic", "direct_ode": "direct"}


def radial_nodes(rhos, step: float) -> np.ndarray:
    """Table radii covering rhos: the radii themselves when few, else a uniform grid of spacing ≤ step."""
    unique = np.unique(np.asarray(rhos, dtype=float))
    if len(unique) < 4:
        return unique
    lo, hi = float(unique[0]), float(unique[-1])
    count = max(4, math.ceil((hi - lo) / step) + 1)
    return np.linspace(lo, hi, count)


def zero_frequency(data_hat, t: float, l: int) -> complex:
    """D_t^l û(t, 0) = Σ_{k≥l} (it)^{k−l}/(k−l)! f̂_k(0)."""
    return complex(sum((1j * t) ** (k - l) / math.factorial(k - l) * data_hat[k] for k in range(l, len(data_hat))))


@dataclass
class Solution:
    grid: SpectralGrid
    times: np.ndarray
    method: str
    alpha: tuple
    spectra: np.ndarray  # (T, m, *grid.shape), D_t^l D_x^α û

    def field(self, time_index: int, l: int = 0) -> np.ndarray:
        return self.grid.inverse(self.spectra[time_index, l])

    def time_derivative(self, time_index: int, l: int = 0) -> np.ndarray:
        """∂_t^l D_x^α u = i^l D_t^l D_x^α u, real for real ∂_t^k u(0)."""
        return (1j) ** l * self.field(time_index, l)

    def imag_defect(self) -> float:
        """Largest |Im| of the real fields relative to their magnitude."""
        worst = 0.0
        for i in range(len(self.times)):
            for l in range(self.spectra.shape[1]):
                values = self.time_derivative(i, l)
                scale = float(np.max(np.abs(values)))
                if scale > 0:
                    worst = max(worst, float(np.max(np.abs(values.imag))) / scale)
        return worst


class CauchySolver:
    """Per-frequency evolution of one data set, prepared for a fixed list of times."""

    def __init__(self, op: OperatorSpec, grid: SpectralGrid, data: CauchyData, times: Sequence[float],
                 roots: Optional[RootField], method: str = "asymptotic", alpha: Optional[Sequence[int]] = None,
                 config: Optional[CauchyConfig] = None, asymint: Optional[AsymintConfig] = None,
                 spectral: Optional[SpectralConfig] = None, threads: int = 1,
                 band: Optional[float] = None):
        self._config = config or CauchyConfig()
        self._asymint = asymint or AsymintConfig()
        if roots is None:
            raise CertificateMissing(f"No hyperbolicity certificate for operator {op.name or '<unnamed>'}")
        if roots.op is not op and roots.op.to_dict() != op.to_dict():
            raise CertificateMissing("Hyperbolicity certificate belongs to a different operator")
        if method not in SOLVE_METHODS:
            raise ConfigError(f"Unknown method '{method}', expected one of {', '.join(SOLVE_METHODS)}")
        if grid.n != op.n or data.m != op.m or data.grid is not grid:
            raise ConfigError("Operator, grid and data dimensions do not match")
        self.alpha = tuple(int(v) for v in alpha) if alpha is not None else (0,) * op.n
        if len(self.alpha) != op.n or min(self.alpha) < 0:
            raise ConfigError(f"Spatial multi-index {list(self.alpha)} must have {op.n} entries ≥ 0")

        self.op = op
        self.grid = grid
        self.data = data
        self.method = method
        self.times = np.atleast_1d(np.asarray(times, dtype=float))
        # band: only |ξ| ≤ band is evolved, the rest of the spectrum stays zero
        grid.check_resolution(self._config.max_resolved_xi if band is None else band)
        t_reach = float(np.max(np.abs(self.times))) if self.times.size else 0.0
        grid.check_box(roots.bound_constant, t_reach, data.radius, self._config.box_margin)

        self.diag = build_diagonalizer(build_companion(op, roots.config), roots)
        self.ph = PhaseAccumulator(roots, spectral)
        psi = PsiFunction.from_operator(op)

        xi = grid.frequencies().reshape(-1, op.n)
        self._xi = xi
        self._rho = np.linalg.norm(xi, axis=-1)
        self._data_hat = data.spectra.reshape(op.m, -1)
        magnitude = np.max(np.abs(self._data_hat), axis=0)
        scale = float(np.max(magnitude))
        self._active = np.flatnonzero((self._rho > 0) & (magnitude > self._config.spectrum_floor * scale)
                                    & (self._rho <= (np.inf if band is None else band)))
        self._classes = direction_classes(op, xi[self._active]) if len(self._active) else []

        table_method = SOLVE_METHODS[method]
        step = self._config.radial_step

        def build(entry):
            omega, members = entry
            nodes = radial_nodes(self._rho[self._active[members]], step)
            return ray_amplitudes(self.diag, self.ph, omega, nodes, self.times, table_method,
                                  self._asymint.t_max, self._asymint.ode_tol, psi, self._asymint.tail_tol)

        self._tables = parallel_map(build, self._classes, threads)
        logger.info("Cauchy solver (%s): %d active frequencies of %d, %d amplitude tables, %d times",
                    method, len(self._active), len(self._rho), len(self._tables), len(self.times))

    def spectrum(self, time_index: int) -> np.ndarray:
        """D_t^l D_x^α û at one prepared time, shape (m, *grid.shape)."""
        m = self.op.m
        t = float(self.times[time_index])
        out = np.zeros((m, len(self._rho)), dtype=complex)
        powers = np.arange(m)
        for (omega, members), table in zip(self._classes, self._tables):
            index = self._active[members]
            rho = self._rho[index]
            amplitude = table.at(time_index, rho)  # (P, m, m)
            modes = np.exp(1j * rho[:, None] * self.ph.unit_theta(t, omega)[None, :])
            n_inv = self.diag.frame(t, omega).N_inv
            data_hat = self._data_hat[:, index].T
            for l in range(m):
                weighted = rho[:, None] ** (l - powers)[None, :] * data_hat
                coupled = np.einsum("pjk,pk->pj", amplitude, weighted)
                out[l, index] = np.sum(modes * n_inv[l][None, :] * coupled, axis=-1)

        origin = self._data_hat[:, 0]
        for l in range(m):
            out[l, 0] = zero_frequency(origin, t, l)
        if any(self.alpha):
            out *= np.prod(self._xi ** np.asarray(self.alpha), axis=-1)[None, :]
        return out.reshape((m,) + self.grid.shape)

    def solve(self) -> Solution:
        spectra = np.stack([self.spectrum(i) for i in range(len(self.times))])
        return Solution(grid=self.grid, times=self.times, method=self.method, alpha=self.alpha, spectra=spectra)


def solve(op: OperatorSpec, grid: SpectralGrid, data: CauchyData, times: Sequence[float],
          method: str = "asymptotic", roots: Optional[RootField] = None,
          alpha: Optional[Sequence[int]] = None, config: Optional[CauchyConfig] = None,
          asymint: Optional[AsymintConfig] = None, spectral: Optional[SpectralConfig] = None,
          threads: int = 1) -> Solution:
    """D_t^l D_x^α u(t, ·) for l = 0..m−1 at every requested time."""
    return CauchySolver(op, grid, data, times, roots, method, alpha, config, asymint, spectral, threads).solve()
