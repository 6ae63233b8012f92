"""Smooth cutoffs built from the C^∞ step s(x) = f(x)/(f(x)+f(1−x)), f(x) = e^{−1/x}."""

from dataclasses import dataclass

import numpy as np

from app.errors import ConfigError


def smooth_step(x) -> np.ndarray:
    """0 for x ≤ 0, 1 for x ≥ 1, C^∞ in between."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        left = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        right = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return left / (left + right)


def plateau(r, inner: float, outer: float) -> np.ndarray:
    """1 for |r| ≤ inner, 0 for |r| ≥ outer."""
    if not 0 <= inner < outer:
        raise ConfigError(f"Plateau needs 0 ≤ inner < outer, got {inner}, {outer}")
    return smooth_step((outer - np.abs(r)) / (outer - inner))


@dataclass(frozen=True)
class AnnulusWindow:
    """Smooth radial window supported in [inner, outer], equal to 1 away from both ramps."""

    inner: float
    outer: float
    ramp_fraction: float = 0.25

    def __post_init__(self):
        if not 0 < self.inner < self.outer or not np.isfinite(self.outer):
            raise ConfigError(f"Window must satisfy 0 < inner < outer < ∞, got [{self.inner}, {self.outer}]")
        if not 0 < self.ramp_fraction <= 0.5:
            raise ConfigError(f"ramp_fraction must lie in (0, 0.5], got {self.ramp_fraction}")

    @property
    def ramp(self) -> float:
        return self.ramp_fraction * (self.outer - self.inner)

    def __call__(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        return smooth_step((rho - self.inner) / self.ramp) * smooth_step((self.outer - rho) / self.ramp)
