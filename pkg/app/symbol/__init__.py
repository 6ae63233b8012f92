from .catalog import anisotropic_wave, bi_wave, double_root, triple, wave
from .operator import OperatorSpec, eval_symbol, load_operator, operator_from_dict
from .roots import (
    LimitRoots,
    RootField,
    characteristic_roots,
    default_certificate,
    hyperbolicity_certificate,
    limiting_roots,
    root_derivatives,
    root_time_derivative,
    roots_batch,
    sphere_directions,
)

__all__ = [
    "LimitRoots",
    "OperatorSpec",
    "RootField",
    "anisotropic_wave",
    "bi_wave",
    "characteristic_roots",
    "default_certificate",
    "double_root",
    "eval_symbol",
    "hyperbolicity_certificate",
    "limiting_roots",
    "load_operator",
    "operator_from_dict",
    "root_derivatives",
    "root_time_derivative",
    "roots_batch",
    "sphere_directions",
    "triple",
    "wave",
]
