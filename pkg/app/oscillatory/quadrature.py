"""Composite Gauss–Legendre panels sized to the oscillation frequency."""

import logging
import math

import numpy as np

from app.errors import ResolutionError

logger = logging.getLogger(__name__)

_MIN_PANELS = 16


def panel_count(frequency: float, length: float, points_per_period: int, order: int, refine: int = 1) -> int:
    """Panels so that every period 2π/frequency carries points_per_period nodes."""
    periods = frequency * length / (2.0 * math.pi)
    return refine * max(_MIN_PANELS, math.ceil(periods * points_per_period / order))


def panel_rule(a: float, b: float, panels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    centres = 0.5 * (edges[:-1] + edges[1:])
    x = (centres[:, None] + half[:, None] * nodes[None, :]).reshape(-1)
    w = (half[:, None] * weights[None, :]).reshape(-1)
    return x, w


def periodic_nodes(count: int) -> tuple[np.ndarray, np.ndarray]:
    """Trapezoid nodes on [0, 2π); spectrally accurate for smooth periodic integrands."""
    angles = 2.0 * math.pi * np.arange(count) / count
    return angles, np.full(count, 2.0 * math.pi / count)


def angular_count(frequency: float, points_per_period: int, minimum: int, refine: int = 1) -> int:
    return refine * max(minimum, math.ceil(frequency * points_per_period / (2.0 * math.pi)))


def check_budget(evaluations: int, budget: int, what: str):
    if evaluations > budget:
        raise ResolutionError(f"{what} needs {evaluations} evaluations, above the budget of {budget}")
    logger.debug("%s: %d evaluations", what, evaluations)
