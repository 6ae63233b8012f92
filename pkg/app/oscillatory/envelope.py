import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from app.errors import ConfigError

logger = logging.getLogger(__name__)


@dataclass
class EnvelopeFit:
    lambdas: list
    magnitudes: list
    fitted_slope: float
    intercept: float
    predicted_power: float
    sup_constant: float  # max (1+λ)^p |I| over the window
    window: tuple

    def to_dict(self) -> dict:
        return {
            "lambdas": self.lambdas,
            "magnitudes": self.magnitudes,
            "fitted_slope": self.fitted_slope,
            "intercept": self.intercept,
            "predicted_power": self.predicted_power,
            "predicted_slope": -self.predicted_power,
            "sup_constant": self.sup_constant,
            "window": list(self.window),
        }


def fit_envelope(grid, magnitudes, predicted_power: float, window: Optional[tuple] = None,
                 min_points: int = 8) -> EnvelopeFit:
    """Least-squares slope of log|I| against log λ, and the sup constant for decay power p."""
    grid = np.asarray(grid, dtype=float)
    magnitudes = np.abs(np.asarray(magnitudes))
    if grid.shape != magnitudes.shape:
        raise ConfigError("Grid and magnitudes must have the same length")
    lo, hi = window if window is not None else (float(np.min(grid)), float(np.max(grid)))
    inside = (grid >= lo) & (grid <= hi)
    if np.count_nonzero(inside) < min_points:
        raise ConfigError(f"Envelope window [{lo:g}, {hi:g}] holds {np.count_nonzero(inside)} points, need {min_points}")
    x, y = grid[inside], magnitudes[inside]
    if np.any(x <= 0) or np.any(y <= 0):
        raise ConfigError("Envelope fit needs positive grid values and magnitudes")

    ratios = x[1:] / x[:-1]
    if not np.allclose(ratios, ratios[0], rtol=1e-6):
        logger.warning("Envelope grid is not geometric; the fit weights the window unevenly")

    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    sup_constant = float(np.max((1.0 + x) ** predicted_power * y))
    logger.debug("Envelope slope %.4f (predicted %.4f), sup constant %.4g", slope, -predicted_power, sup_constant)
    return EnvelopeFit(
        lambdas=x.tolist(),
        magnitudes=y.tolist(),
        fitted_slope=float(slope),
        intercept=float(intercept),
        predicted_power=predicted_power,
        sup_constant=sup_constant,
        window=(lo, hi),
    )
