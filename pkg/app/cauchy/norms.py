import logging
import math
from typing import Optional

import numpy as np

from app.cauchy.grid import CauchyData, SpectralGrid
from app.errors import ConfigError

logger = logging.getLogger(__name__)


def lq_norm(field, grid: SpectralGrid, q: float) -> float:
    """Cell-weighted L^q norm on the grid; q = inf is the max."""
    magnitude = np.abs(np.asarray(field))
    if math.isinf(q):
        return float(np.max(magnitude))
    if q < 1:
        raise ConfigError(f"L^q norm needs q ≥ 1, got {q}")
    return float((np.sum(magnitude ** q) * grid.cell_volume) ** (1.0 / q))


def sobolev_norm(spectrum, grid: SpectralGrid, s: float, homogeneous: bool = True) -> float:
    """(∫ w(ξ)^{2s} |f̂|² dξ/(2π)ⁿ)^{1/2} with w = |ξ| or ⟨ξ⟩."""
    spectrum = np.asarray(spectrum)
    rho = grid.xi_norm()
    power = np.abs(spectrum) ** 2
    if homogeneous:
        weight = np.zeros_like(rho)
        nonzero = rho > 0
        weight[nonzero] = rho[nonzero] ** (2.0 * s)
        if s < 0:
            zero_mode = float(power.flat[0])
            if s <= -grid.n / 2.0 and zero_mode > 1e-20 * float(np.sum(power)):
                raise ConfigError(
                    f"Homogeneous order s={s:g} is not integrable at ξ = 0 for data with nonzero mean"
                )
            smallest = grid.dxi
            logger.debug("Negative order s=%g weights the smallest |ξ|=%.4g by %.4g", s, smallest,
                         smallest ** (2.0 * s))
        elif s == 0:
            weight[~nonzero] = 1.0
    else:
        weight = (1.0 + rho ** 2) ** s
    return float(math.sqrt(np.sum(weight * power) / grid.box ** grid.n))


def sobolev_data_norm(data: CauchyData, s: float, homogeneous: bool = True, k: Optional[int] = None) -> float:
    """‖f_k‖ of order s for one k, or Σ_k ‖f_k‖ of order s − k over all data."""
    if k is not None:
        if not 0 <= k < data.m:
            raise ConfigError(f"Data index k={k} outside 0..{data.m - 1}")
        return sobolev_norm(data.spectra[k], data.grid, s, homogeneous)
    return sum(sobolev_norm(data.spectra[j], data.grid, s - j, homogeneous) for j in range(data.m))
