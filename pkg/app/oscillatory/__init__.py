from .cutoff import AnnulusWindow, plateau, smooth_step
from .envelope import EnvelopeFit, fit_envelope
from .kernel import DispersiveKernel, KernelValue, dispersive_kernel, split_kernel
from .model import (
    CUTOFFS,
    ModelIntegral,
    PhaseConditionReport,
    check_phase_conditions,
    eval_model,
    self_convergence,
)

__all__ = [
    "AnnulusWindow",
    "CUTOFFS",
    "DispersiveKernel",
    "EnvelopeFit",
    "KernelValue",
    "ModelIntegral",
    "PhaseConditionReport",
    "check_phase_conditions",
    "dispersive_kernel",
    "eval_model",
    "fit_envelope",
    "plateau",
    "self_convergence",
    "smooth_step",
    "split_kernel",
]
