"""
Decay exponents and Sobolev costs of the L^p–L^q estimates.

With δ = 1/p − 1/q the solution decays like (1+|t|)^{−κδ}, κ = (n−1)/γ for
convex limiting level sets and κ = 1/γ₀ otherwise; the data pay
N_p derivatives in L̇^p. p = 1 stands for the sup-norm surrogate.
"""

import math
from typing import Optional

from app.errors import ConfigError


def index_gap(p: float, q: float) -> float:
    if p < 1 or q < p:
        raise ConfigError(f"Exponents must satisfy 1 ≤ p ≤ q ≤ ∞, got p={p}, q={q}")
    inv_q = 0.0 if math.isinf(q) else 1.0 / q
    return 1.0 / p - inv_q


def conjugate(p: float) -> float:
    if p < 1:
        raise ConfigError(f"Exponent p={p} must be at least 1")
    return math.inf if p == 1 else p / (p - 1.0)


def predicted_exponent(n: int, gamma: Optional[int], gamma0: Optional[int], convex: bool,
                       p: float, q: float) -> float:
    """Decay power κ(1/p − 1/q) for the u₂ and u₃ zones and for the whole solution."""
    gap = index_gap(p, q)
    if n == 1:
        return 0.0
    if convex:
        if gamma is None:
            raise ConfigError("Convex decay rate needs gamma")
        return (n - 1) / gamma * gap
    if gamma0 is None:
        raise ConfigError("Non-convex decay rate needs gamma0")
    return gap / gamma0


def low_frequency_exponent(n: int, p: float, q: float) -> float:
    return n * index_gap(p, q)


def data_cost(n: int, gamma: Optional[int], gamma0: Optional[int], convex: bool, p: float, q: float) -> float:
    """N_p: derivatives of the data paid by the large-time estimate."""
    gap = index_gap(p, q)
    if n == 1:
        return gap
    if convex:
        return (n - (n - 1) / gamma + (n - 1) // gamma + 1) * gap
    return (n - 1.0 / gamma0 + 1) * gap


def intermediate_cost(n: int, gamma: int, p: float, q: float) -> float:
    """M_p for the u₂ zone."""
    return (n - (n - 1) / gamma) * index_gap(p, q)


def small_time_cost(n: int, p: float, q: float) -> float:
    """Ñ_p for t ∈ (0, 1]."""
    return n * index_gap(p, q)


def required_moment_orders(n: int, gamma: Optional[int]) -> list[int]:
    """Orders r with (1+|t|)^r a' ∈ L¹ needed by the convex estimate."""
    if n == 1 or gamma is None:
        return [0, 1]
    return list(range(0, (n - 1) // gamma + 2))
