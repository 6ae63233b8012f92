from .expression import CoeffExpr, constant_coefficient, evaluate, parse_coefficient, parse_expression
from .moments import MomentReport, PsiFunction, moment_check, psi

__all__ = [
    "CoeffExpr",
    "MomentReport",
    "PsiFunction",
    "constant_coefficient",
    "evaluate",
    "moment_check",
    "parse_coefficient",
    "parse_expression",
    "psi",
]
