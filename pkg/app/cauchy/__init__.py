from .experiments import DecayReport, SmallTimeReport, decay_experiment, low_frequency_norm, small_time_check
from .grid import DATA_KINDS, CauchyData, SpectralGrid, profile_radius
from .norms import lq_norm, sobolev_data_norm, sobolev_norm
from .rates import (
    conjugate,
    data_cost,
    index_gap,
    intermediate_cost,
    low_frequency_exponent,
    predicted_exponent,
    required_moment_orders,
    small_time_cost,
)
from .solver import SOLVE_METHODS, CauchySolver, Solution, solve
from .zones import ZoneSplit, low_frequency_grid, zone_multipliers, zone_split

__all__ = [
    "CauchyData",
    "CauchySolver",
    "DATA_KINDS",
    "DecayReport",
    "SOLVE_METHODS",
    "SmallTimeReport",
    "Solution",
    "SpectralGrid",
    "ZoneSplit",
    "conjugate",
    "data_cost",
    "decay_experiment",
    "index_gap",
    "intermediate_cost",
    "low_frequency_exponent",
    "low_frequency_grid",
    "low_frequency_norm",
    "lq_norm",
    "predicted_exponent",
    "profile_radius",
    "required_moment_orders",
    "small_time_check",
    "small_time_cost",
    "sobolev_data_norm",
    "sobolev_norm",
    "solve",
    "zone_multipliers",
    "zone_split",
]
