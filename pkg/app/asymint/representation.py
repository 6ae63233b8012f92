"""
Reconstruction of D_t^l û(t,ξ) from an asymptotic profile, the direct
ODE oracle it is checked against, and the ξ-derivative probe of α and ε.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from app.coeffs.moments import PsiFunction, moment_check
from app.config.settings import CoeffConfig
from app.errors import ConfigError, ConvergenceError, DivergentMoment
from app.spectral.companion import CompanionSystem, Diagonalizer, propagate_companion, unit_directions
from app.spectral.phases import PhaseAccumulator
from app.asymint.levinson import AsymptoticProfile

logger = logging.getLogger(__name__)


@dataclass
class RepresentationKernel:
    """Terms of the sum Σ_{j,k} e^{iθ_j} n^{lj} (α+ε)^k_j |ξ|^{l−k} f̂_k at one (t, ξ)."""

    l: int
    phases: np.ndarray  # θ_j(t;ξ)
    n_row: np.ndarray  # n^{lj}(t;ξ), row l of N^{-1}
    amplitudes: np.ndarray  # α_± + ε_±(t), m×m
    weights: np.ndarray  # |ξ|^{l−k}

    def apply(self, data_hat) -> complex:
        data_hat = np.asarray(data_hat, dtype=complex)
        modes = np.exp(1j * self.phases) * self.n_row
        return complex(modes @ self.amplitudes @ (self.weights * data_hat))


def representation_kernel(profile: AsymptoticProfile, diag: Diagonalizer, ph: PhaseAccumulator,
                          l: int, t: float) -> RepresentationKernel:
    m = diag.op.m
    if not 0 <= l <= m - 1:
        raise ConfigError(f"Derivative order l={l} outside 0..{m - 1}")
    xi = np.asarray(profile.xi, dtype=float)
    rho, omega = unit_directions(xi)
    frame = diag.frame(float(t), omega)
    return RepresentationKernel(
        l=l,
        phases=ph.theta(t, xi),
        n_row=frame.N_inv[l],
        amplitudes=profile.amplitude(t),
        weights=float(rho) ** (l - np.arange(m, dtype=float)),
    )


def reconstruct_hat_u(profile: AsymptoticProfile, diag: Diagonalizer, ph: PhaseAccumulator,
                      data_hat, l: int, t: float) -> complex:
    return representation_kernel(profile, diag, ph, l, t).apply(data_hat)


def direct_hat_u(cs: CompanionSystem, xi, data_hat, l: int, t: float, tol: float = 1e-10) -> complex:
    """D_t^l û(t,ξ) from the companion system with v_j(0) = |ξ|^{m−j−1} f̂_j."""
    m = cs.m
    if not 0 <= l <= m - 1:
        raise ConfigError(f"Derivative order l={l} outside 0..{m - 1}")
    rho, omega = unit_directions(xi)
    rho = float(rho)
    powers = np.arange(m, dtype=float)
    v0 = rho ** (m - 1 - powers) * np.asarray(data_hat, dtype=complex)
    V = propagate_companion(cs, omega, [rho], [float(t)], tol)[0, 0]
    return complex(rho ** (l - m + 1) * (V @ v0)[l])


# ─── ξ-derivative envelopes ────────────────────────────────────────


@dataclass
class DerivativeProbeReport:
    mu: tuple
    alpha_constant: float
    eps_constant: float
    rows: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mu": list(self.mu),
            "alpha_constant": self.alpha_constant,
            "eps_constant": self.eps_constant,
            "rows": self.rows,
        }


def _stencil(mu: tuple, step: float) -> list[tuple[np.ndarray, float]]:
    """Central-difference offsets and weights for ∂^μ with |μ| ∈ {1, 2}."""
    n = len(mu)
    axes = [i for i, count in enumerate(mu) for _ in range(count)]
    unit = np.eye(n)
    if len(axes) == 1:
        e = unit[axes[0]] * step
        return [(e, 0.5 / step), (-e, -0.5 / step)]
    a, b = axes
    if a == b:
        e = unit[a] * step
        return [(e, 1.0 / step ** 2), (np.zeros(n), -2.0 / step ** 2), (-e, 1.0 / step ** 2)]
    ea, eb = unit[a] * step, unit[b] * step
    w = 0.25 / step ** 2
    return [(ea + eb, w), (ea - eb, -w), (-ea + eb, -w), (-ea - eb, w)]


def derivative_bounds_probe(profile_at: Callable[[np.ndarray], AsymptoticProfile], psi: PsiFunction,
                            xi_points, mu, t_ladder=(5.0, 10.0, 20.0, 40.0), rel_step: float = 1e-3,
                            ceiling: float = 1e6, coeff_config=None) -> DerivativeProbeReport:
    """Finite-difference ∂_ξ^μ of α_± and ε_±(t) with the weighted envelope constants.

    Weights are 1 for |ξ| ≥ 1 and |ξ|^{|μ|} below; ε is normalized by
    exp(∫₀^{|t|} (1+s)^{|μ|} Ψ).
    """
    mu = tuple(int(v) for v in mu)
    order = sum(mu)
    if order not in (1, 2) or min(mu) < 0:
        raise ConfigError(f"Multi-index {mu} must have order 1 or 2")
    coeff_config = coeff_config or CoeffConfig()
    for expr in psi.terms:
        report = moment_check(expr, order, coeff_config.moment_tol, coeff_config)
        if not report.converged:
            raise DivergentMoment(f"Moment of order {order} diverges for {expr.source}")

    alpha_constant = 0.0
    eps_constant = 0.0
    rows = []
    for xi in np.atleast_2d(np.asarray(xi_points, dtype=float)):
        if len(xi) != len(mu):
            raise ConfigError(f"Multi-index {mu} does not match dimension {len(xi)}")
        rho = float(np.linalg.norm(xi))
        weight = 1.0 if rho >= 1.0 else rho ** order
        stencil = _stencil(mu, rel_step * rho)
        profiles = [(profile_at(xi + offset), w) for offset, w in stencil]

        d_alpha = max(
            float(np.max(np.abs(sum(w * getattr(p, side) for p, w in profiles))))
            for side in ("alpha_plus", "alpha_minus")
        )
        d_eps = 0.0
        for t in t_ladder:
            for signed in (t, -t):
                derivative = sum(w * p.eps(signed) for p, w in profiles)
                scale = math.exp(psi.weighted_integral(signed, order))
                d_eps = max(d_eps, float(np.max(np.abs(derivative))) / scale)

        sup_alpha = d_alpha * weight
        sup_eps = d_eps * weight
        if not (math.isfinite(sup_alpha) and math.isfinite(sup_eps)) or max(sup_alpha, sup_eps) > ceiling:
            raise ConvergenceError(
                f"Envelope violation at xi={xi.tolist()}: alpha {sup_alpha:.3e}, eps {sup_eps:.3e}"
            )
        alpha_constant = max(alpha_constant, sup_alpha)
        eps_constant = max(eps_constant, sup_eps)
        rows.append({
            "xi": xi.tolist(), "rho": rho, "d_alpha": d_alpha, "d_eps": d_eps,
            "weighted_alpha": sup_alpha, "weighted_eps": sup_eps,
        })
        logger.debug("Derivative probe at |xi|=%.4g: alpha %.4g eps %.4g", rho, d_alpha, d_eps)

    return DerivativeProbeReport(mu=mu, alpha_constant=alpha_constant, eps_constant=eps_constant, rows=rows)
