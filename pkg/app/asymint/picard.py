"""
Truncated Peano–Baker series for Q(t;ξ).

Q(t) = Σ_k P_k(t), P_0 = N(0), P_k(t) = i ∫₀^t C(s) P_{k−1}(s) ds.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from app.errors import ConfigError
from app.spectral.companion import Diagonalizer, unit_directions
from app.spectral.coupling import coupling_core
from app.spectral.phases import PhaseAccumulator

logger = logging.getLogger(__name__)

# Grid points per radian of the fastest relative phase.
_POINTS_PER_RADIAN = 40


@dataclass
class PicardResult:
    xi: list
    t: float
    terms: int
    matrix: np.ndarray
    remainder: float  # ‖P_terms(t)‖, the first omitted term

    def to_dict(self) -> dict:
        return {
            "xi": self.xi,
            "t": self.t,
            "terms": self.terms,
            "matrix": [[[float(v.real), float(v.imag)] for v in row] for row in self.matrix],
            "remainder": self.remainder,
        }


def _grid_size(points: int, rho: float, spread: float, span: float) -> int:
    needed = int(_POINTS_PER_RADIAN * rho * spread * span) + 1
    size = max(points, needed)
    return size if size % 2 == 1 else size + 1


def picard_compare(diag: Diagonalizer, ph: PhaseAccumulator, xi, t: float,
                   terms: int = 8, points: int = 4001) -> PicardResult:
    if terms < 1:
        raise ConfigError(f"Picard series needs at least one term, got {terms}")
    xi = np.asarray(xi, dtype=float)
    rho, omega = unit_directions(xi)
    rho = float(rho)
    initial = diag.frame(0.0, omega).N.astype(complex)
    if t == 0.0 or diag.op.is_constant:
        return PicardResult(xi=xi.tolist(), t=t, terms=terms, matrix=initial, remainder=0.0)

    sign = 1.0 if t > 0 else -1.0
    span = abs(t)
    spread = 2.0 * diag.roots.bound_constant
    s = np.linspace(0.0, span, _grid_size(points, rho, spread, span))
    times = sign * s

    core = coupling_core(diag, times, omega)
    phase = np.exp(1j * rho * ph.unit_theta(times, omega))
    C = np.conj(phase)[:, :, None] * core * phase[:, None, :]

    # ∫₀^t f(r) dr = sign ∫₀^{|t|} f(sign s) ds
    term = np.broadcast_to(initial, (len(s),) + initial.shape)
    total = initial.copy()
    for _ in range(1, terms):
        term = 1j * sign * integrate.cumulative_simpson(C @ term, x=s, axis=0, initial=0)
        total = total + term[-1]
    following = 1j * sign * integrate.cumulative_simpson(C @ term, x=s, axis=0, initial=0)
    remainder = float(np.linalg.norm(following[-1], ord=2))
    logger.debug("Picard at xi=%s t=%g: %d terms, remainder %.3e", xi.tolist(), t, terms, remainder)
    return PicardResult(xi=xi.tolist(), t=t, terms=terms, matrix=total, remainder=remainder)
