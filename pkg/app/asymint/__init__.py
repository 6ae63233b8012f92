from .levinson import (
    AsymptoticProfile,
    RayTrajectory,
    eps_decay_constant,
    extract_profile,
    extract_profiles,
    integrate_ray,
    integrate_z,
    profile_rows,
    reverse_check,
)
from .picard import PicardResult, picard_compare
from .representation import (
    DerivativeProbeReport,
    RepresentationKernel,
    derivative_bounds_probe,
    direct_hat_u,
    reconstruct_hat_u,
    representation_kernel,
)
from .table import METHODS, RayAmplitudes, ray_amplitudes

__all__ = [
    "AsymptoticProfile",
    "DerivativeProbeReport",
    "METHODS",
    "PicardResult",
    "RayAmplitudes",
    "RayTrajectory",
    "RepresentationKernel",
    "derivative_bounds_probe",
    "direct_hat_u",
    "eps_decay_constant",
    "extract_profile",
    "extract_profiles",
    "integrate_ray",
    "integrate_z",
    "picard_compare",
    "profile_rows",
    "ray_amplitudes",
    "reconstruct_hat_u",
    "representation_kernel",
    "reverse_check",
]
