"""
Error types shared by all lab modules.

Each error carries the exit code the command-line runner returns for it.
Numerical conditions that are reported rather than fatal (moment
non-convergence, envelope verdicts) never raise.
"""

from typing import Optional, Sequence


class LabError(Exception):
    exit_code = 1


class ConfigError(LabError, ValueError):
    exit_code = 1


class ExpressionError(ConfigError):
    """Syntax or identifier error in an expression, with its byte offset."""

    def __init__(self, message: str, source: str = "", offset: int = 0):
        super().__init__(f"{message} at byte {offset}")
        self.source = source
        self.offset = offset


class EvaluationError(ConfigError):
    pass


class GeometryError(LabError, ValueError):
    exit_code = 1


class HyperbolicityError(LabError):
    exit_code = 2

    def __init__(self, message: str, t: Optional[float] = None, xi: Optional[Sequence[float]] = None):
        if t is not None and xi is not None:
            message = f"{message} at t={t:.6g}, xi={[round(float(v), 12) for v in xi]}"
        super().__init__(message)
        self.t = t
        self.xi = None if xi is None else tuple(float(v) for v in xi)


class NonHyperbolic(HyperbolicityError):
    pass


class RootCollision(HyperbolicityError):
    pass


class CertificateMissing(HyperbolicityError):
    pass


class ConvergenceError(LabError, RuntimeError):
    exit_code = 3


class DivergentMoment(ConvergenceError):
    pass


class StepSizeCollapse(ConvergenceError):
    pass


class TailNotConverged(ConvergenceError):
    def __init__(self, message: str, suggested_t_max: float):
        super().__init__(f"{message}; suggested t_max={suggested_t_max:.6g}")
        self.suggested_t_max = suggested_t_max


class ResolutionError(LabError):
    exit_code = 4


class BoxTooSmall(ResolutionError):
    pass
