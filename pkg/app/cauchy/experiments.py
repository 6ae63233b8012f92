"""
Decay experiments: fixed data, L^q norms of the solution and of its
frequency zones over time, log–log slopes against the predicted rates.
A fitted slope at or below the prediction witnesses the upper bound only.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from app.cauchy.grid import CauchyData, SpectralGrid
from app.cauchy.norms import lq_norm, sobolev_data_norm
from app.cauchy.rates import (
    conjugate,
    low_frequency_exponent,
    predicted_exponent,
    required_moment_orders,
    small_time_cost,
)
from app.cauchy.solver import CauchySolver
from app.cauchy.zones import OUTER, low_frequency_grid, zone_multipliers, zone_split
from app.coeffs.moments import moment_check
from app.config.settings import LabConfig
from app.errors import ConfigError, DivergentMoment
from app.geometry.limits import LimitingGeometry, limiting_geometry
from app.symbol.operator import OperatorSpec
from app.symbol.roots import RootField, default_certificate, limiting_roots

logger = logging.getLogger(__name__)

ZONES = ("total", "u1", "u2", "u3")
PASS, FAIL, UNRESOLVED = "pass", "fail", "unresolved"


@dataclass
class DecayReport:
    p: float
    q: float
    l: int
    method: str
    predicted: dict
    fitted: dict
    verdicts: dict
    windows: dict
    rows: list = field(default_factory=list)
    geometry: Optional[dict] = None

    @property
    def verdict(self) -> str:
        """fail if any zone fails, unresolved if any zone could not be fitted, else pass."""
        if any(v == FAIL for v in self.verdicts.values()):
            return FAIL
        if not self.verdicts or any(v == UNRESOLVED for v in self.verdicts.values()):
            return UNRESOLVED
        return PASS

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "l": self.l,
            "method": self.method,
            "predicted_slopes": {zone: -power for zone, power in self.predicted.items()},
            "fitted_slopes": self.fitted,
            "verdicts": self.verdicts,
            "windows": self.windows,
            "verdict": self.verdict,
            "geometry": self.geometry,
            "note": "slopes bound the decay from above; sharpness is not certified",
        }


def _fit_slope(x: np.ndarray, y: np.ndarray) -> Optional[float]:
    if len(x) < 2 or np.any(y <= 0):
        return None
    slope, _ = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope)


def _check_moments(op: OperatorSpec, orders: Sequence[int], config: LabConfig):
    for expr in op.coeffs.values():
        if expr.is_constant:
            continue
        for r in orders:
            report = moment_check(expr, r, config.coeffs.moment_tol, config.coeffs)
            if not report.converged:
                raise DivergentMoment(f"Moment of order {r} diverges for coefficient {expr.source}")


def _geometry_for(op: OperatorSpec, config: LabConfig) -> LimitingGeometry:
    limits = limiting_roots(op, config.symbol, config.coeffs)
    return limiting_geometry(limits, config.geometry)


def low_frequency_norm(op: OperatorSpec, data: CauchyData, t: float, roots: RootField, q: float, l: int = 0,
                       alpha: Optional[Sequence[int]] = None, method: str = "asymptotic",
                       config: Optional[LabConfig] = None, threads: int = 1) -> float:
    """‖D_t^l D_x^α u₁(t)‖_q on a lattice refined to the support |ξ| ≤ 1/(1+|t|)."""
    config = config or LabConfig()
    band = OUTER / (1.0 + abs(t))
    grid = low_frequency_grid(op.n, t, roots.bound_constant, data.radius, config.cauchy)
    low_data = data.resampled(grid)
    solver = CauchySolver(op, grid, low_data, [t], roots, method, alpha, config.cauchy, config.asymint,
                          config.spectral, threads, band=band)
    low, _ = zone_multipliers(grid, t)
    return lq_norm(grid.inverse(low * solver.spectrum(0)[l]), grid, q)


def decay_experiment(op: OperatorSpec, grid: SpectralGrid, data: CauchyData, times: Sequence[float],
                     p: float, q: Optional[float] = None, geometry: Optional[LimitingGeometry] = None,
                     roots: Optional[RootField] = None, l: int = 0, alpha: Optional[Sequence[int]] = None,
                     method: str = "asymptotic", config: Optional[LabConfig] = None,
                     threads: int = 1) -> DecayReport:
    """Fit log‖·‖_q of u and of u₁, u₂, u₃ over time against the predicted powers."""
    config = config or LabConfig()
    q = conjugate(p) if q is None else q
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise ConfigError("Decay experiments run forward in time")
    if not 0 <= l < op.m:
        raise ConfigError(f"Derivative order l={l} outside 0..{op.m - 1}")

    geometry = geometry or _geometry_for(op, config)
    _check_moments(op, required_moment_orders(op.n, geometry.gamma), config)
    roots = roots or default_certificate(op, config.symbol)
    gamma_rate = predicted_exponent(op.n, geometry.gamma, geometry.gamma0, geometry.convex, p, q)
    predicted = {"total": gamma_rate, "u1": low_frequency_exponent(op.n, p, q), "u2": gamma_rate, "u3": gamma_rate}

    solver = CauchySolver(op, grid, data, times, roots, method, alpha, config.cauchy, config.asymint,
                          config.spectral, threads)
    rows = []
    for i, t in enumerate(times):
        spectrum = solver.spectrum(i)[l]
        split = zone_split(spectrum, grid, t)
        rows.append({
            "t": float(t),
            "total": lq_norm(grid.inverse(spectrum), grid, q),
            "u1": low_frequency_norm(op, data, t, roots, q, l, alpha, method, config, threads),
            "u2": lq_norm(split.u2, grid, q),
            "u3": lq_norm(split.u3, grid, q),
        })
        logger.debug("t=%g: |u|_q=%.6g, |u1|_q=%.6g", t, rows[-1]["total"], rows[-1]["u1"])

    cauchy = config.cauchy
    t = np.array([row["t"] for row in rows])
    mask = (t >= cauchy.slope_window_min) & (t <= cauchy.slope_window_max)
    usable = int(np.count_nonzero(mask))

    fitted, verdicts, windows = {}, {}, {}
    for zone in ZONES:
        x = t[mask] + 1.0 if zone in ("total", "u1") else t[mask]
        y = np.array([row[zone] for row in rows])[mask]
        slope = _fit_slope(x, y) if usable >= 4 else None
        fitted[zone] = slope
        windows[zone] = [float(t[mask].min()), float(t[mask].max())] if usable else None
        if slope is None:
            logger.warning("Zone %s unresolved: %d usable times", zone, usable)
            verdicts[zone] = UNRESOLVED
        else:
            verdicts[zone] = PASS if slope <= -predicted[zone] + cauchy.slope_tol else FAIL

    report = DecayReport(p=p, q=q, l=l, method=method, predicted=predicted, fitted=fitted, verdicts=verdicts,
                         windows=windows, rows=rows, geometry=geometry.to_dict())
    logger.info("Decay experiment: total slope %s (predicted %.4f), verdict %s",
                fitted["total"], -gamma_rate, report.verdict)
    return report


# ─── Small times ───────────────────────────────────────────────────


@dataclass
class SmallTimeReport:
    p: float
    q: float
    order: float
    data_norm: float
    surrogate: bool
    constant: float
    reference: float
    rows: list = field(default_factory=list)

    @property
    def bounded(self) -> bool:
        return self.constant <= 10.0 * self.reference

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "order": self.order,
            "data_norm": self.data_norm,
            "data_norm_kind": "L2 surrogate" if self.surrogate else "exact",
            "constant": self.constant,
            "reference": self.reference,
            "bounded": self.bounded,
            "rows": self.rows,
        }


def small_time_check(op: OperatorSpec, grid: SpectralGrid, data: CauchyData, times: Sequence[float],
                     p: float, q: Optional[float] = None, roots: Optional[RootField] = None, l: int = 0,
                     method: str = "asymptotic", config: Optional[LabConfig] = None,
                     threads: int = 1) -> SmallTimeReport:
    """‖u₂ + u₃‖_q over the data norm of order Ñ_p + l − k, for t ∈ (0, 1]."""
    config = config or LabConfig()
    q = conjugate(p) if q is None else q
    times = np.asarray(times, dtype=float)
    if times.size == 0 or np.any(times <= 0) or np.any(times > 1):
        raise ConfigError("Small-time check needs times in (0, 1]")
    roots = roots or default_certificate(op, config.symbol)
    order = small_time_cost(op.n, p, q) + l
    data_norm = sobolev_data_norm(data, order, homogeneous=True)
    if data_norm <= 0:
        raise ConfigError("Small-time check needs nonzero data")

    solver = CauchySolver(op, grid, data, times, roots, method, None, config.cauchy, config.asymint,
                          config.spectral, threads)
    low_at_zero, _ = zone_multipliers(grid, 0.0)
    rows = []
    for i, t in enumerate(times):
        spectrum = solver.spectrum(i)[l]
        split = zone_split(spectrum, grid, t)
        high = lq_norm(grid.inverse(split.spectra[1] + split.spectra[2]), grid, q)
        low = lq_norm(grid.inverse(low_at_zero * spectrum), grid, q)
        rows.append({
            "t": float(t),
            "ratio": high / data_norm,
            "u1_low_ratio": lq_norm(split.u1, grid, q) / low if low > 0 else float("nan"),
        })

    ratios = np.array([row["ratio"] for row in rows])
    reference = float(ratios[int(np.argmax(times))])
    report = SmallTimeReport(p=p, q=q, order=order, data_norm=data_norm, surrogate=p != 2,
                             constant=float(np.max(ratios)), reference=reference, rows=rows)
    logger.info("Small-time constant %.4g (t=1 value %.4g), bounded=%s", report.constant, reference, report.bounded)
    return report
