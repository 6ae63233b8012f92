import os
from dataclasses import dataclass, field, fields

from app.errors import ConfigError


@dataclass
class CoeffConfig:
    moment_tol: float = 1e-6
    window_cap: float = 2.0 ** 20
    quad_limit: int = 200


@dataclass
class SymbolConfig:
    imag_tol: float = 1e-9
    separation_tol: float = 1e-6
    sphere_samples: int = 16
    t_grid_min: float = -40.0
    t_grid_max: float = 40.0
    t_grid_points: int = 161


@dataclass
class SpectralConfig:
    phase_cell: float = 1.0 / 16.0
    quadrature_tol: float = 1e-8
    energy_samples: int = 20


@dataclass
class AsymintConfig:
    ode_tol: float = 1e-10
    t_max: float = 40.0
    tail_tol: float = 1e-6
    picard_terms: int = 8
    picard_points: int = 4001
    fd_rel_step: float = 1e-4
    envelope_ceiling: float = 1e6


@dataclass
class GeometryConfig:
    gamma_max: int = 8
    sphere_samples: int = 64
    plane_samples: int = 64
    noise_threshold: float = 1e-5
    hessian_tol: float = 1e-8
    chart_radius: float = 0.25  # relative to h(0)
    fit_points: int = 41
    fit_degree: int = 20


@dataclass
class OscillatoryConfig:
    gl_order: int = 16
    points_per_period: int = 20
    eval_budget: int = 10_000_000
    angular_nodes: int = 64
    self_convergence_tol: float = 1e-6
    min_window_points: int = 8


@dataclass
class CauchyConfig:
    box_margin: float = 0.10
    max_resolved_xi: float = 4.0
    radial_step: float = 0.02
    spectrum_floor: float = 1e-14
    slope_window_min: float = 10.0
    slope_window_max: float = 100.0
    slope_tol: float = 0.1
    zone_cells: int = 8


@dataclass
class RunConfig:
    out_dir: str = os.path.join(os.path.dirname(__file__), "..", "..", "runs")
    seed: int = 0
    threads: int = 1
    debug: bool = False


@dataclass
class LabConfig:
    coeffs: CoeffConfig = field(default_factory=CoeffConfig)
    symbol: SymbolConfig = field(default_factory=SymbolConfig)
    spectral: SpectralConfig = field(default_factory=SpectralConfig)
    asymint: AsymintConfig = field(default_factory=AsymintConfig)
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    oscillatory: OscillatoryConfig = field(default_factory=OscillatoryConfig)
    cauchy: CauchyConfig = field(default_factory=CauchyConfig)
    run: RunConfig = field(default_factory=RunConfig)

    def tolerances(self) -> dict:
        """Numerical settings recorded in run manifests."""
        return {
            section.name: dict(vars(getattr(self, section.name)))
            for section in fields(self)
            if section.name != "run"
        }


def load_config() -> LabConfig:
    config = LabConfig()
    config.run.out_dir = os.getenv("LAB_OUT_DIR", config.run.out_dir)
    config.run.seed = int(os.getenv("LAB_SEED", config.run.seed))
    config.run.threads = int(os.getenv("LAB_THREADS", config.run.threads))
    config.run.debug = os.getenv("LAB_DEBUG", "false").lower() == "true"
    return config


def apply_overrides(config: LabConfig, overrides: dict) -> LabConfig:
    """Apply a {section: {field: value}} mapping, e.g. a JSON "settings" block."""
    for section_name, values in overrides.items():
        section = getattr(config, section_name, None)
        if section is None or not isinstance(values, dict):
            raise ConfigError(f"Unknown settings section '{section_name}'")
        known = {f.name: f for f in fields(section)}
        for key, value in values.items():
            if key not in known:
                raise ConfigError(f"Unknown setting '{section_name}.{key}'")
            current = getattr(section, key)
            try:
                setattr(section, key, type(current)(value))
            except (TypeError, ValueError) as e:
                raise ConfigError(f"Bad value for '{section_name}.{key}': {e}") from e
    return config
