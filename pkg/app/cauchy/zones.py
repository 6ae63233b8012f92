"""
Frequency zones of a solution at time t:

    u₁ = ψ((1+|t|)|D|) u,  u₂ = (1−ψ((1+|t|)|D|)) χ(|D|) u,  u₃ = the rest,

with ψ = χ ≡ 1 on [0, 1/2] and ≡ 0 on [1, ∞).
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from app.cauchy.grid import SpectralGrid
from app.config.settings import CauchyConfig
from app.oscillatory.cutoff import plateau

INNER, OUTER = 0.5, 1.0

# Nyquist frequency of the low lattice, in units of the u₁ support radius
_LOW_NYQUIST = 8.0


@dataclass
class ZoneSplit:
    t: float
    spectra: tuple  # (û₁, û₂, û₃), each shaped like the input spectrum
    grid: SpectralGrid

    @property
    def u1(self) -> np.ndarray:
        return self.grid.inverse(self.spectra[0])

    @property
    def u2(self) -> np.ndarray:
        return self.grid.inverse(self.spectra[1])

    @property
    def u3(self) -> np.ndarray:
        return self.grid.inverse(self.spectra[2])

    def fields(self) -> tuple:
        return self.u1, self.u2, self.u3


def zone_multipliers(grid: SpectralGrid, t: float) -> tuple[np.ndarray, np.ndarray]:
    rho = grid.xi_norm()
    low = plateau((1.0 + abs(t)) * rho, INNER, OUTER)
    middle = (1.0 - low) * plateau(rho, INNER, OUTER)
    return low, middle


def zone_split(spectrum, grid: SpectralGrid, t: float) -> ZoneSplit:
    """Split û (..., *grid.shape); û₃ is û − û₁ − û₂ so the parts add up to û exactly."""
    spectrum = np.asarray(spectrum)
    low, middle = zone_multipliers(grid, t)
    first = low * spectrum
    second = middle * spectrum
    third = spectrum - first - second
    return ZoneSplit(t=float(t), spectra=(first, second, third), grid=grid)


def low_frequency_grid(n: int, t: float, bound: float, data_radius: float,
                       config: Optional[CauchyConfig] = None) -> SpectralGrid:
    """Lattice for u₁ at time t.

    The support |ξ| ≤ 1/(1+|t|) spans zone_cells lattice spacings, the
    propagation cone fits in the box with the usual margin, and the Nyquist
    frequency is _LOW_NYQUIST times the support radius.
    """
    config = config or CauchyConfig()
    scale = 1.0 + abs(t)
    box = max(2.0 * math.pi * config.zone_cells * scale,
              2.0 * ((1.0 + config.box_margin) * (bound * abs(t) + data_radius)))
    points = max(8, 1 << math.ceil(math.log2(_LOW_NYQUIST * box / (math.pi * scale)) - 1e-9))
    return SpectralGrid(n, points, box)
