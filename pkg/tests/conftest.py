import numpy as np
import pytest

from app.config.settings import LabConfig
from app.spectral.companion import build_companion, build_diagonalizer
from app.spectral.phases import PhaseAccumulator
from app.symbol import catalog, operator_from_dict
from app.symbol.roots import default_certificate

BUMPY = "1 + exp(-t^2)"


@pytest.fixture
def config(tmp_path):
    config = LabConfig()
    config.run.out_dir = str(tmp_path / "run")
    return config


@pytest.fixture
def constant_wave():
    return catalog.wave("1", 2)


@pytest.fixture
def bumpy_wave():
    return catalog.wave(BUMPY, 2)


@pytest.fixture
def bumpy_wave_1d():
    return catalog.wave(BUMPY, 1)


def frame_tools(op):
    """Certificate, diagonalizer and phase accumulator for an operator."""
    roots = default_certificate(op)
    cs = build_companion(op, roots.config)
    diag = build_diagonalizer(cs, roots)
    return roots, cs, diag, PhaseAccumulator(roots)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def varying_triple(n=2):
    """τ(τ² − c(t)²|ξ|²) with c² = 1 + e^{−t²}."""
    coeffs = [{"nu": [2 if r == i else 0 for r in range(n)], "j": 1, "expr": f"-({BUMPY})"} for i in range(n)]
    return operator_from_dict({"m": 3, "n": n, "coeffs": coeffs}, name="varying triple")


def varying_bi_wave():
    """(τ² − |ξ|²)(τ² − 4c(t)²|ξ|²) in the plane, c² = 1 + e^{−t²}."""
    coeffs = [
        {"nu": [2, 0], "j": 2, "expr": "-(5 + 4*exp(-t^2))"},
        {"nu": [0, 2], "j": 2, "expr": "-(5 + 4*exp(-t^2))"},
        {"nu": [4, 0], "j": 0, "expr": "4 + 4*exp(-t^2)"},
        {"nu": [0, 4], "j": 0, "expr": "4 + 4*exp(-t^2)"},
        {"nu": [2, 2], "j": 0, "expr": "8 + 8*exp(-t^2)"},
    ]
    return operator_from_dict({"m": 4, "n": 2, "coeffs": coeffs}, name="varying bi-wave")
