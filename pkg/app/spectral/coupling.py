"""
Coupling matrix C = Φ^{-1}(D_t N)N^{-1}Φ and the energy estimate.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from app.coeffs.moments import PsiFunction, moment_check
from app.config.settings import CoeffConfig
from app.errors import ConvergenceError
from app.spectral.companion import CompanionSystem, Diagonalizer, propagate_companion, unit_directions
from app.spectral.phases import PhaseAccumulator

logger = logging.getLogger(__name__)

# Relative allowance for the trapezoid-integrated exponent.
_BOUND_SLACK = 1e-3


def coupling_core(diag: Diagonalizer, t, omega) -> np.ndarray:
    """−i(∂_tN)N^{-1} at unit direction ω; C is this matrix conjugated by Φ."""
    frame = diag.frame(t, omega)
    return -1j * (frame.dN @ frame.N_inv)


def coupling(diag: Diagonalizer, ph: PhaseAccumulator, t: float, xi) -> np.ndarray:
    _, omega = unit_directions(xi)
    core = coupling_core(diag, float(t), omega)
    phase = np.exp(1j * ph.theta(t, xi))
    return np.conj(phase)[:, None] * core * phase[None, :]


def coupling_constant(diag: Diagonalizer, psi: PsiFunction, directions=None, t_grid=None) -> float:
    """Smallest sampled c with ‖C(t;ξ)‖ ≤ c Ψ(t); Φ is unitary so C and its core share norms."""
    if psi.is_zero:
        return 0.0
    directions = diag.roots.directions if directions is None else np.asarray(directions, dtype=float)
    t_grid = diag.roots.t_grid if t_grid is None else np.asarray(t_grid, dtype=float)
    weights = psi(t_grid)
    active = weights > 1e-12 * np.max(weights)
    t_active = t_grid[active]
    core = coupling_core(diag, t_active[:, None], directions[None, :, :])
    norms = np.linalg.norm(core, ord=2, axis=(-2, -1))
    constant = float(np.max(norms / weights[active][:, None]))
    logger.debug("Coupling constant %.6g over %d samples", constant, norms.size)
    return constant


def coupling_growth_probe(diag: Diagonalizer, ph: PhaseAccumulator, psi: PsiFunction,
                          xi_samples, t_samples, rel_step: float = 1e-4) -> float:
    """Sampled c with |∂_ξ C| ≤ c |ξ|^{-1}(1+|t|)Ψ(t), by central differences."""
    worst = 0.0
    for xi in np.atleast_2d(np.asarray(xi_samples, dtype=float)):
        rho = np.linalg.norm(xi)
        step = rel_step * rho
        for t in t_samples:
            weight = psi(t)
            if weight <= 0.0:
                continue
            for i in range(len(xi)):
                shift = np.zeros_like(xi)
                shift[i] = step
                derivative = (coupling(diag, ph, t, xi + shift) - coupling(diag, ph, t, xi - shift)) / (2 * step)
                ratio = np.max(np.abs(derivative)) * rho / ((1.0 + abs(t)) * weight)
                worst = max(worst, float(ratio))
    return worst


@dataclass
class EnergyReport:
    """Outcome of energy_check along one frequency.

    holds is judged on exponent, the integral of ‖(∂_tN)N^{-1}‖.
    plain_exponent is the integral of ‖∂_tN‖, the quantity in the classical
    form |v(t)|² ≤ C|v(0)|² exp(2∫‖∂_tN‖) of the estimate; it is reported
    for comparison and takes no part in the verdict.
    """

    xi: list
    t_max: float
    samples: int
    constant: float
    exponent: float  # ∫‖(∂_tN)N^{-1}‖ over [0, t_max]
    plain_exponent: float  # ∫‖∂_tN‖ over [0, t_max]
    max_ratio: float
    w_drift: float
    exponent_finite: bool
    holds: bool = field(default=True)

    def to_dict(self) -> dict:
        return dict(vars(self))


def energy_check(cs: CompanionSystem, diag: Diagonalizer, xi, t_max: float, samples: int = 20,
                 seed: int = 0, tol: float = 1e-10, points: int = 2001) -> EnergyReport:
    """Integrate the companion system for random data and test the Gronwall bound.

    With w = N v, |w(t)| ≤ |w(0)| exp(∫‖(∂_tN)N^{-1}‖), which gives
    |v(t)|² ≤ C|v(0)|² exp(2∫‖(∂_tN)N^{-1}‖) with C = ‖N(0)‖² sup‖N^{-1}‖².
    """
    xi = np.asarray(xi, dtype=float)
    rho, omega = unit_directions(xi)
    times = np.linspace(0.0, t_max, points)

    frames = diag.frame(times, omega)
    step_norm = np.linalg.norm(frames.dN @ frames.N_inv, ord=2, axis=(-2, -1))
    dN_norm = np.linalg.norm(frames.dN, ord=2, axis=(-2, -1))
    exponent = integrate.cumulative_trapezoid(step_norm, times, initial=0.0)
    plain = integrate.trapezoid(dN_norm, times)
    inv_norm = np.linalg.norm(frames.N_inv, ord=2, axis=(-2, -1))
    constant = float(np.linalg.norm(frames.N[0], ord=2) ** 2 * np.max(inv_norm) ** 2)

    rng = np.random.default_rng(seed)
    data = rng.standard_normal((cs.m, samples)) + 1j * rng.standard_normal((cs.m, samples))
    V = propagate_companion(cs, omega, [float(rho)], times, tol)[:, 0]
    v = V @ data
    w = frames.N @ v

    v_norm2 = np.sum(np.abs(v) ** 2, axis=1)
    w_norm = np.sqrt(np.sum(np.abs(w) ** 2, axis=1))
    bound = constant * v_norm2[0][None, :] * np.exp(2.0 * exponent)[:, None]
    max_ratio = float(np.max(v_norm2 / bound))
    w_growth = w_norm / (w_norm[0][None, :] * np.exp(exponent)[:, None])
    w_drift = float(np.max(np.abs(w_norm / w_norm[0][None, :] - 1.0)))

    psi = PsiFunction.from_operator(cs.op)
    finite = all(moment_check(expr, 0, 1e-6, CoeffConfig()).converged for expr in psi.terms)
    slack = 1.0 + _BOUND_SLACK
    holds = bool(max_ratio <= slack and np.max(w_growth) <= slack)
    report = EnergyReport(
        xi=xi.tolist(), t_max=t_max, samples=samples, constant=constant,
        exponent=float(exponent[-1]), plain_exponent=float(plain), max_ratio=max_ratio,
        w_drift=w_drift, exponent_finite=finite, holds=holds,
    )
    if not holds:
        raise ConvergenceError(f"Energy bound violated at xi={xi.tolist()}: ratio {max_ratio:.6g}")
    logger.debug("Energy check at xi=%s: ratio %.3g, drift %.3g", xi.tolist(), max_ratio, w_drift)
    return report


def dump_frame(diag: Diagonalizer, ph: PhaseAccumulator, times, xi) -> list[dict]:
    """Rows (t, entries of N, D and C) along one frequency, for CSV inspection."""
    m = diag.op.m
    rows = []
    for t in times:
        frame = diag.frame(float(t), xi)
        C = coupling(diag, ph, float(t), xi)
        row = {"t": float(t)}
        for j in range(m):
            row[f"D{j}"] = float(frame.mu[j])
            for k in range(m):
                row[f"N{j}{k}"] = float(frame.N[j, k])
                row[f"C{j}{k}_re"] = float(C[j, k].real)
                row[f"C{j}{k}_im"] = float(C[j, k].imag)
        rows.append(row)
    return rows
