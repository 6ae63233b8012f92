"""
Periodic box [−L/2, L/2)ⁿ with its FFT lattice, and Cauchy data on it.

Spectra follow the continuous transform f̂(ξ) = ∫ e^{−ix·ξ} f(x) dx, so
spectrum() scales fftn by the cell volume and inverse() divides it out.
The sample at index points/2 is x = 0.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from app.config.settings import CauchyConfig
from app.errors import BoxTooSmall, ConfigError, ResolutionError

logger = logging.getLogger(__name__)

DATA_KINDS = ("gaussian", "bump")


class SpectralGrid:
    def __init__(self, n: int, points: int, box: float):
        if not 1 <= n <= 3:
            raise ConfigError(f"Grid dimension must be 1, 2 or 3, got {n}")
        if points < 8 or points & (points - 1):
            raise ConfigError(f"Points per axis must be a power of two ≥ 8, got {points}")
        if not box > 0:
            raise ConfigError(f"Box size must be positive, got {box}")
        self.n = n
        self.points = points
        self.box = float(box)
        self.dx = self.box / points
        self.axis = (np.arange(points) - points // 2) * self.dx
        self.wavenumbers = 2.0 * math.pi * np.fft.fftfreq(points, d=self.dx)

    @classmethod
    def auto(cls, n: int, bound: float, t_max: float, data_radius: float,
             config: Optional[CauchyConfig] = None) -> "SpectralGrid":
        """Smallest power-of-two grid holding the propagation cone and resolving max_resolved_xi."""
        config = config or CauchyConfig()
        box = 2.0 * (1.0 + config.box_margin) * (bound * abs(t_max) + data_radius)
        dx = math.pi / (2.0 * config.max_resolved_xi)
        points = max(8, 1 << math.ceil(math.log2(box / dx)))
        logger.info("Auto grid: n=%d, box %.4g, %d points per axis", n, box, points)
        return cls(n, points, box)

    @property
    def shape(self) -> tuple:
        return (self.points,) * self.n

    @property
    def cell_volume(self) -> float:
        return self.dx ** self.n

    @property
    def nyquist(self) -> float:
        return math.pi / self.dx

    @property
    def dxi(self) -> float:
        return 2.0 * math.pi / self.box

    def coordinates(self) -> np.ndarray:
        return np.stack(np.meshgrid(*([self.axis] * self.n), indexing="ij"), axis=-1)

    def frequencies(self) -> np.ndarray:
        return np.stack(np.meshgrid(*([self.wavenumbers] * self.n), indexing="ij"), axis=-1)

    def xi_norm(self) -> np.ndarray:
        return np.linalg.norm(self.frequencies(), axis=-1)

    def spectrum(self, samples) -> np.ndarray:
        axes = tuple(range(-self.n, 0))
        return np.fft.fftn(np.fft.ifftshift(samples, axes=axes), axes=axes) * self.cell_volume

    def inverse(self, spectrum) -> np.ndarray:
        axes = tuple(range(-self.n, 0))
        return np.fft.fftshift(np.fft.ifftn(spectrum, axes=axes), axes=axes) / self.cell_volume

    def check_resolution(self, max_resolved_xi: float):
        if self.nyquist < 2.0 * max_resolved_xi:
            raise ResolutionError(
                f"Nyquist frequency {self.nyquist:.4g} is below twice the resolved |xi| {max_resolved_xi:g}"
            )

    def check_box(self, bound: float, t_max: float, data_radius: float, margin: float):
        needed = (1.0 + margin) * (bound * abs(t_max) + data_radius)
        if self.box / 2.0 < needed:
            raise BoxTooSmall(
                f"Box half-width {self.box / 2:.4g} cannot hold the cone of radius {needed:.4g} "
                f"(speed {bound:.4g}, t={t_max:g}, data radius {data_radius:.4g}); "
                f"use box ≥ {2 * needed:.4g}"
            )

    def to_dict(self) -> dict:
        return {"n": self.n, "points": self.points, "box": self.box}


# ─── Data ──────────────────────────────────────────────────────────


def _parse_spec(spec: dict, n: int) -> tuple[str, float, float, np.ndarray]:
    kind = spec.get("kind", "gaussian")
    if kind not in DATA_KINDS:
        raise ConfigError(f"Unknown data kind '{kind}', expected one of {', '.join(DATA_KINDS)}")
    amplitude = float(spec.get("amplitude", 1.0))
    width = float(spec.get("width", 1.0))
    if width <= 0:
        raise ConfigError(f"Data width must be positive, got {width}")
    center = np.asarray(spec.get("center", [0.0] * n), dtype=float)
    if center.shape != (n,):
        raise ConfigError(f"Data center must have {n} components")
    return kind, amplitude, width, center


def profile_radius(specs: Sequence[dict], n: int) -> float:
    """Radius of the ball holding every profile: |c| + 8w for Gaussians, |c| + w for bumps."""
    radius = 0.0
    for spec in specs:
        kind, _, width, center = _parse_spec(spec, n)
        reach = 8.0 * width if kind == "gaussian" else width
        radius = max(radius, float(np.linalg.norm(center)) + reach)
    return radius


def _profile(grid: SpectralGrid, spec: dict) -> np.ndarray:
    kind, amplitude, width, center = _parse_spec(spec, grid.n)
    r = np.linalg.norm(grid.coordinates() - center, axis=-1) / width
    if kind == "gaussian":
        return amplitude * np.exp(-0.5 * r ** 2)
    inside = r < 1.0
    values = np.zeros_like(r)
    values[inside] = amplitude * np.exp(1.0 - 1.0 / (1.0 - r[inside] ** 2))
    return values


@dataclass
class CauchyData:
    """f_k = D_t^k u(0, ·), k = 0..m−1, as samples and spectra."""

    grid: SpectralGrid
    samples: np.ndarray  # (m, *grid.shape)
    spectra: np.ndarray
    radius: float
    specs: list = field(default_factory=list)

    @property
    def m(self) -> int:
        return self.samples.shape[0]

    @classmethod
    def from_samples(cls, grid: SpectralGrid, samples, radius: Optional[float] = None,
                     floor: float = 1e-14) -> "CauchyData":
        samples = np.asarray(samples, dtype=complex)
        if samples.shape[1:] != grid.shape:
            raise ConfigError(f"Data samples have shape {samples.shape[1:]}, grid is {grid.shape}")
        if radius is None:
            magnitude = np.max(np.abs(samples), axis=0)
            scale = float(np.max(magnitude))
            occupied = magnitude > floor * scale if scale > 0 else np.zeros_like(magnitude, dtype=bool)
            distance = np.linalg.norm(grid.coordinates(), axis=-1)
            radius = float(np.max(distance[occupied])) if np.any(occupied) else 0.0
        return cls(grid=grid, samples=samples, spectra=grid.spectrum(samples), radius=float(radius))

    @classmethod
    def from_specs(cls, grid: SpectralGrid, m: int, specs: Sequence[dict]) -> "CauchyData":
        samples = np.zeros((m,) + grid.shape, dtype=complex)
        for spec in specs:
            k = int(spec.get("k", 0))
            if not 0 <= k < m:
                raise ConfigError(f"Data index k={k} outside 0..{m - 1}")
            samples[k] += _profile(grid, spec)
        radius = profile_radius(specs, grid.n)
        logger.debug("Cauchy data from %d profiles, radius %.4g", len(specs), radius)
        return cls(grid=grid, samples=samples, spectra=grid.spectrum(samples), radius=radius, specs=list(specs))

    @classmethod
    def from_time_derivatives(cls, grid: SpectralGrid, g, radius: Optional[float] = None) -> "CauchyData":
        """Data from real ∂_t^k u(0) samples g_k: f_k = (−i)^k g_k."""
        g = np.asarray(g, dtype=float)
        factors = (-1j) ** np.arange(g.shape[0])
        samples = factors.reshape((-1,) + (1,) * grid.n) * g
        return cls.from_samples(grid, samples, radius)

    def resampled(self, grid: SpectralGrid) -> "CauchyData":
        """The same data seen from another lattice.

        Spectra are the continuous transform at the new wavenumbers, summed
        axis by axis over this grid's samples, so a coarse lattice on a wide
        box still sees the profile at full resolution.
        """
        if grid.n != self.grid.n:
            raise ConfigError(f"Cannot resample {self.grid.n}-dimensional data onto a {grid.n}-dimensional grid")
        kernel = np.exp(-1j * np.outer(grid.wavenumbers, self.grid.axis)) * self.grid.dx
        spectra = self.samples
        for axis in range(1, grid.n + 1):
            spectra = np.moveaxis(np.tensordot(spectra, kernel, axes=([axis], [1])), -1, axis)
        return CauchyData(grid=grid, samples=grid.inverse(spectra), spectra=spectra, radius=self.radius,
                          specs=list(self.specs))

    def to_dict(self) -> dict:
        return {"grid": self.grid.to_dict(), "m": self.m, "radius": self.radius, "specs": self.specs}
