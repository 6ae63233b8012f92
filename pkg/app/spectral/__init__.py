from .companion import (
    CompanionSystem,
    Diagonalizer,
    Frame,
    build_companion,
    build_diagonalizer,
    propagate_companion,
    unit_directions,
)
from .coupling import EnergyReport, coupling, coupling_constant, coupling_growth_probe, dump_frame, energy_check
from .phases import PhaseAccumulator, phases

__all__ = [
    "CompanionSystem",
    "Diagonalizer",
    "EnergyReport",
    "Frame",
    "PhaseAccumulator",
    "build_companion",
    "build_diagonalizer",
    "coupling",
    "coupling_constant",
    "coupling_growth_probe",
    "dump_frame",
    "energy_check",
    "phases",
    "propagate_companion",
    "unit_directions",
]
