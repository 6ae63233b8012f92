"""
Standard operators used by experiments and tests.
"""

from itertools import combinations

from app.coeffs.expression import parse_coefficient
from app.symbol.operator import OperatorSpec


def _unit(n: int, i: int, power: int) -> tuple:
    return tuple(power if k == i else 0 for k in range(n))


def wave(c_squared: str = "1", n: int = 2) -> OperatorSpec:
    """D_t² − c(t)²|D_x|²."""
    expr = parse_coefficient(f"-({c_squared})")
    coeffs = {(_unit(n, i, 2), 0): expr for i in range(n)}
    return OperatorSpec(m=2, n=n, coeffs=coeffs, name=f"wave[c^2={c_squared}]")


def anisotropic_wave(speeds_squared: tuple, name: str = "") -> OperatorSpec:
    """D_t² − Σ c_i(t)² D_i²."""
    n = len(speeds_squared)
    coeffs = {
        (_unit(n, i, 2), 0): parse_coefficient(f"-({c2})")
        for i, c2 in enumerate(speeds_squared)
    }
    return OperatorSpec(m=2, n=n, coeffs=coeffs, name=name or f"wave{list(speeds_squared)}")


def triple(n: int = 2) -> OperatorSpec:
    """τ(τ² − |ξ|²)."""
    coeffs = {(_unit(n, i, 2), 1): parse_coefficient("-1") for i in range(n)}
    return OperatorSpec(m=3, n=n, coeffs=coeffs, name="triple")


def bi_wave(n: int = 2) -> OperatorSpec:
    """(τ² − |ξ|²)(τ² − 4|ξ|²) = τ⁴ − 5|ξ|²τ² + 4|ξ|⁴."""
    coeffs = {(_unit(n, i, 2), 2): parse_coefficient("-5") for i in range(n)}
    for i in range(n):
        coeffs[(_unit(n, i, 4), 0)] = parse_coefficient("4")
    for i, k in combinations(range(n), 2):
        nu = tuple(2 if r in (i, k) else 0 for r in range(n))
        coeffs[(nu, 0)] = parse_coefficient("8")
    return OperatorSpec(m=4, n=n, coeffs=coeffs, name="bi-wave")


def double_root() -> OperatorSpec:
    """(τ − ξ)² in one dimension; not strictly hyperbolic."""
    coeffs = {
        ((1,), 1): parse_coefficient("-2"),
        ((2,), 0): parse_coefficient("1"),
    }
    return OperatorSpec(m=2, n=1, coeffs=coeffs, name="double-root")
