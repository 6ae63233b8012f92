"""
Asymptotic integration of D_t Q = C(t;ξ) Q, Q(0) = N(0;ξ).

All frequencies ρω on one ray share the core −i(∂_tN)N^{-1}(t;ω) and the
unit phases Θ(t;ω); they differ only through e^{iρΘ}. A ray trajectory
integrates every ρ of the ray in one ODE system.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from app.coeffs.moments import PsiFunction
from app.errors import ConfigError, StepSizeCollapse, TailNotConverged
from app.spectral.companion import Diagonalizer, unit_directions
from app.spectral.coupling import coupling_constant, coupling_core
from app.spectral.phases import PhaseAccumulator

logger = logging.getLogger(__name__)

_TAIL_SEARCH_CAP = 2.0 ** 20


class RayTrajectory:
    """Q(t; ρω) for a batch of ρ on one ray, |t| ≤ t_max."""

    def __init__(self, diag: Diagonalizer, omega: np.ndarray, rhos: np.ndarray, t_max: float,
                 initial: np.ndarray, forward=None, backward=None):
        self.diag = diag
        self.omega = omega
        self.rhos = rhos
        self.t_max = t_max
        self.initial = initial
        self._forward = forward
        self._backward = backward

    @property
    def m(self) -> int:
        return self.initial.shape[-1]

    def Q(self, t: float) -> np.ndarray:
        if abs(t) > self.t_max * (1.0 + 1e-12):
            raise ConfigError(f"t={t} outside the integrated range ±{self.t_max}")
        count = len(self.rhos)
        solution = self._forward if t >= 0 else self._backward
        if solution is None or t == 0.0:
            return np.broadcast_to(self.initial, (count, self.m, self.m)).copy()
        return solution(t).reshape(count, self.m, self.m)

    def alpha(self, side: str) -> np.ndarray:
        return self.Q(self.t_max if side == "plus" else -self.t_max)

    def sup_norm(self, samples: int = 401) -> np.ndarray:
        """max_t ‖Q(t)‖₂ per ρ over a uniform sample of [−t_max, t_max]."""
        best = np.zeros(len(self.rhos))
        for t in np.linspace(-self.t_max, self.t_max, samples):
            best = np.maximum(best, np.linalg.norm(self.Q(t), ord=2, axis=(-2, -1)))
        return best


def _z_rhs(diag: Diagonalizer, ph: PhaseAccumulator, omega: np.ndarray, rhos: np.ndarray):
    m = diag.op.m
    count = len(rhos)

    def rhs(t, y):
        core = coupling_core(diag, t, omega)
        phase = np.exp(1j * rhos[:, None] * ph.unit_theta(t, omega)[None, :])
        C = np.conj(phase)[:, :, None] * core[None, :, :] * phase[:, None, :]
        return (1j * (C @ y.reshape(count, m, m))).reshape(-1)

    return rhs


def _solve_side(rhs, t_end: float, y0: np.ndarray, tol: float):
    solution = integrate.solve_ivp(
        rhs, (0.0, t_end), y0, method="DOP853", dense_output=True, rtol=tol, atol=tol * 1e-2,
    )
    if solution.status != 0:
        raise StepSizeCollapse(f"z-system integration stopped at t={solution.t[-1]:.6g}: {solution.message}")
    logger.debug("z-system to t=%g in %d steps", t_end, len(solution.t))
    return solution.sol


def integrate_ray(diag: Diagonalizer, ph: PhaseAccumulator, omega, rhos, t_max: float, tol: float,
                  sides: tuple = ("plus", "minus")) -> RayTrajectory:
    if t_max <= 0:
        raise ConfigError(f"t_max must be positive, got {t_max}")
    omega = np.asarray(omega, dtype=float)
    rhos = np.atleast_1d(np.asarray(rhos, dtype=float))
    initial = diag.frame(0.0, omega).N.astype(complex)
    if diag.op.is_constant:
        return RayTrajectory(diag, omega, rhos, t_max, initial)

    m = diag.op.m
    count = len(rhos)
    rhs = _z_rhs(diag, ph, omega, rhos)
    y0 = np.broadcast_to(initial, (count, m, m)).reshape(-1).astype(complex)
    forward = _solve_side(rhs, t_max, y0, tol) if "plus" in sides else None
    backward = _solve_side(rhs, -t_max, y0, tol) if "minus" in sides else None
    return RayTrajectory(diag, omega, rhos, t_max, initial, forward, backward)


def integrate_z(diag: Diagonalizer, ph: PhaseAccumulator, xi, t_max: float, tol: float = 1e-10) -> RayTrajectory:
    rho, omega = unit_directions(xi)
    return integrate_ray(diag, ph, omega, [float(rho)], t_max, tol)


@dataclass
class AsymptoticProfile:
    xi: np.ndarray
    alpha_plus: np.ndarray
    alpha_minus: np.ndarray
    trunc_time: float
    trunc_error_bound: float
    bound_constant: float  # c with |ε(t)| ≤ c ∫_{|t|}^∞ Ψ
    trajectory: RayTrajectory = field(repr=False)
    index: int = 0

    def amplitude(self, t: float) -> np.ndarray:
        """Q(t) inside the integrated range, α_± beyond it."""
        if t > self.trunc_time:
            return self.alpha_plus
        if t < -self.trunc_time:
            return self.alpha_minus
        return self.trajectory.Q(t)[self.index]

    def eps(self, t: float) -> np.ndarray:
        alpha = self.alpha_plus if t >= 0 else self.alpha_minus
        return self.amplitude(t) - alpha

    def to_dict(self) -> dict:
        def encode(matrix):
            return [[[float(v.real), float(v.imag)] for v in row] for row in matrix]

        return {
            "xi": [float(v) for v in self.xi],
            "alpha_plus": encode(self.alpha_plus),
            "alpha_minus": encode(self.alpha_minus),
            "trunc_time": self.trunc_time,
            "trunc_error_bound": self.trunc_error_bound,
            "bound_constant": self.bound_constant,
        }


def _tail(psi: PsiFunction, t: float) -> float:
    return max(psi.tail_integral(t), psi.tail_integral(-t))


def extract_profiles(trajectory: RayTrajectory, psi: PsiFunction, tail_tol: float) -> list[AsymptoticProfile]:
    """Profiles for every ρ of a ray trajectory, with certified truncation bounds."""
    t_max = trajectory.t_max
    if psi.is_zero:
        coupling_c = 0.0
        q_sup = np.zeros(len(trajectory.rhos))
    else:
        t_grid = np.linspace(-t_max, t_max, 801)
        coupling_c = coupling_constant(trajectory.diag, psi, trajectory.omega[None, :], t_grid)
        q_sup = trajectory.sup_norm()

    tail = _tail(psi, t_max)
    constants = coupling_c * q_sup * math.exp(coupling_c * tail)
    bound = float(np.max(constants) * tail) if len(constants) else 0.0
    if bound > tail_tol:
        suggested = t_max
        while float(np.max(constants)) * _tail(psi, suggested) > tail_tol and suggested < _TAIL_SEARCH_CAP:
            suggested *= 2.0
        raise TailNotConverged(
            f"Truncation bound {bound:.3e} exceeds tail tolerance {tail_tol:.3e} at t_max={t_max:g}",
            suggested_t_max=suggested,
        )

    alpha_plus = trajectory.alpha("plus")
    alpha_minus = trajectory.alpha("minus")
    profiles = []
    for i, rho in enumerate(trajectory.rhos):
        profiles.append(AsymptoticProfile(
            xi=rho * trajectory.omega,
            alpha_plus=alpha_plus[i],
            alpha_minus=alpha_minus[i],
            trunc_time=t_max,
            trunc_error_bound=float(constants[i] * tail),
            bound_constant=float(constants[i]),
            trajectory=trajectory,
            index=i,
        ))
    return profiles


def extract_profile(trajectory: RayTrajectory, psi: PsiFunction, tail_tol: float) -> AsymptoticProfile:
    return extract_profiles(trajectory, psi, tail_tol)[0]


def eps_decay_constant(profile: AsymptoticProfile, psi: PsiFunction, times) -> float:
    """max over t of max_entries |ε(t)| / ∫_{|t|}^∞ Ψ (0 when Ψ ≡ 0)."""
    worst = 0.0
    for t in times:
        tail = psi.tail_integral(t)
        size = float(np.max(np.abs(profile.eps(t))))
        if tail > 0.0:
            worst = max(worst, size / tail)
        elif size > 0.0:
            worst = math.inf
    return worst


def reverse_check(trajectory: RayTrajectory, ph: PhaseAccumulator, tol: float = 1e-10) -> float:
    """Integrate back from Q(±t_max) to 0 and return the worst deviation from N(0)."""
    diag = trajectory.diag
    if diag.op.is_constant:
        return 0.0
    m = trajectory.m
    count = len(trajectory.rhos)
    rhs = _z_rhs(diag, ph, trajectory.omega, trajectory.rhos)

    worst = 0.0
    for side, t_end in (("plus", trajectory.t_max), ("minus", -trajectory.t_max)):
        late = trajectory.alpha(side).reshape(-1)
        solution = integrate.solve_ivp(rhs, (t_end, 0.0), late, method="DOP853", rtol=tol, atol=tol * 1e-2)
        if solution.status != 0:
            raise StepSizeCollapse(f"Reverse integration stopped: {solution.message}")
        back = solution.y[:, -1].reshape(count, m, m)
        worst = max(worst, float(np.max(np.abs(back - trajectory.initial[None]))))
    return worst


def profile_rows(profile: AsymptoticProfile, times) -> list[dict]:
    """CSV rows (t, Re/Im of every entry of ε(t)) for one frequency."""
    m = profile.alpha_plus.shape[0]
    rows = []
    for t in times:
        eps = profile.eps(float(t))
        row = {"t": float(t)}
        for j in range(m):
            for k in range(m):
                row[f"eps{j}{k}_re"] = float(eps[j, k].real)
                row[f"eps{j}{k}_im"] = float(eps[j, k].imag)
        rows.append(row)
    return rows
