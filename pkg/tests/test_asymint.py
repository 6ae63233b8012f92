import math

import numpy as np
import pytest

from app.asymint import (
    derivative_bounds_probe,
    direct_hat_u,
    eps_decay_constant,
    extract_profile,
    integrate_z,
    picard_compare,
    profile_rows,
    ray_amplitudes,
    reconstruct_hat_u,
    reverse_check,
)
from app.coeffs.moments import PsiFunction
from app.errors import ConfigError, TailNotConverged
from app.symbol import catalog
from tests.conftest import BUMPY, frame_tools


def _profile(op, xi, t_max=40.0):
    _, _, diag, ph = frame_tools(op)
    trajectory = integrate_z(diag, ph, xi, t_max)
    return extract_profile(trajectory, PsiFunction.from_operator(op), 1e-6), diag, ph


class TestLevinson:
    def test_constant_coefficients_keep_initial_frame(self):
        op = catalog.wave("1", 2)
        _, _, diag, ph = frame_tools(op)
        trajectory = integrate_z(diag, ph, [1.0, 2.0], 10.0)
        initial = diag.N(0.0, [1.0, 2.0])
        for t in (-10.0, 0.0, 3.5):
            np.testing.assert_array_equal(trajectory.Q(t)[0], initial)

    def test_constant_profile(self):
        profile, diag, _ = _profile(catalog.wave("1", 2), [0.0, 1.0], 10.0)
        np.testing.assert_array_equal(profile.alpha_plus, diag.N(0.0, [0.0, 1.0]))
        assert np.all(profile.eps(4.0) == 0)
        assert profile.trunc_error_bound == 0.0

    def test_eps_decays_with_the_psi_tail(self):
        op = catalog.wave(BUMPY, 2)
        profile, _, _ = _profile(op, [1.0, 0.0])
        psi = PsiFunction.from_operator(op)
        constant = eps_decay_constant(profile, psi, [0.5, 1.0, 2.0, 3.0, -1.0, -2.0])
        assert math.isfinite(constant)
        assert np.max(np.abs(profile.eps(60.0))) == 0.0
        assert np.max(np.abs(profile.eps(3.0))) <= constant * psi.tail_integral(3.0) * (1 + 1e-9)

    def test_reverse_integration_returns_to_start(self):
        op = catalog.wave(BUMPY, 2)
        _, _, diag, ph = frame_tools(op)
        trajectory = integrate_z(diag, ph, [1.0, 0.0], 10.0)
        assert reverse_check(trajectory, ph) < 1e-7

    def test_tail_not_converged_suggests_longer_horizon(self):
        op = catalog.wave("1 + 1/(1+t^2)", 2)
        _, _, diag, ph = frame_tools(op)
        trajectory = integrate_z(diag, ph, [1.0, 0.0], 5.0)
        with pytest.raises(TailNotConverged) as info:
            extract_profile(trajectory, PsiFunction.from_operator(op), 1e-6)
        assert info.value.suggested_t_max > 5.0
        assert info.value.exit_code == 3

    def test_profile_rows(self):
        profile, _, _ = _profile(catalog.wave(BUMPY, 2), [1.0, 0.0])
        rows = profile_rows(profile, [0.0, 1.0])
        assert [row["t"] for row in rows] == [0.0, 1.0]
        assert "eps11_im" in rows[0]

    def test_invalid_horizon(self):
        _, _, diag, ph = frame_tools(catalog.wave(BUMPY, 2))
        with pytest.raises(ConfigError):
            integrate_z(diag, ph, [1.0, 0.0], 0.0)


class TestPicard:
    def test_single_term_at_zero(self):
        _, _, diag, ph = frame_tools(catalog.wave(BUMPY, 2))
        result = picard_compare(diag, ph, [1.0, 0.0], 0.0, terms=1)
        np.testing.assert_array_equal(result.matrix, diag.N(0.0, [1.0, 0.0]))

    def test_constant_coefficients(self):
        _, _, diag, ph = frame_tools(catalog.wave("1", 2))
        result = picard_compare(diag, ph, [1.0, 0.0], 4.0, terms=5)
        np.testing.assert_array_equal(result.matrix, diag.N(0.0, [1.0, 0.0]))

    def test_series_matches_z_system(self):
        _, _, diag, ph = frame_tools(catalog.wave(BUMPY, 2))
        result = picard_compare(diag, ph, [1.0, 0.0], 5.0, terms=10)
        trajectory = integrate_z(diag, ph, [1.0, 0.0], 5.0)
        np.testing.assert_allclose(result.matrix, trajectory.Q(5.0)[0], atol=1e-6)
        assert result.remainder < 1e-6

    def test_needs_a_term(self):
        _, _, diag, ph = frame_tools(catalog.wave(BUMPY, 2))
        with pytest.raises(ConfigError):
            picard_compare(diag, ph, [1.0, 0.0], 1.0, terms=0)


class TestRepresentation:
    def test_initial_time_returns_data(self):
        profile, diag, ph = _profile(catalog.wave(BUMPY, 2), [0.8, 0.6])
        data = np.array([1.0 + 0.5j, -0.25j])
        for l in range(2):
            assert reconstruct_hat_u(profile, diag, ph, data, l, 0.0) == pytest.approx(data[l], abs=1e-12)

    def test_constant_wave_is_a_cosine(self):
        profile, diag, ph = _profile(catalog.wave("1", 2), [2.0, 0.0], 10.0)
        value = reconstruct_hat_u(profile, diag, ph, [1.0, 0.0], 0, 3.0)
        assert value == pytest.approx(math.cos(6.0), abs=1e-12)

    @pytest.mark.parametrize("t", [2.0, 5.0, -3.0])
    def test_matches_direct_integration(self, t):
        op = catalog.wave(BUMPY, 2)
        profile, diag, ph = _profile(op, [1.5, 0.0])
        data = np.array([1.0, 0.3j])
        for l in range(2):
            asymptotic = reconstruct_hat_u(profile, diag, ph, data, l, t)
            direct = direct_hat_u(diag.cs, [1.5, 0.0], data, l, t)
            assert abs(asymptotic - direct) <= 1e-6 * max(abs(direct), 1.0)

    def test_derivative_order_checked(self):
        profile, diag, ph = _profile(catalog.wave("1", 2), [1.0, 0.0], 10.0)
        with pytest.raises(ConfigError):
            reconstruct_hat_u(profile, diag, ph, [1.0, 0.0], 2, 1.0)

    def test_constant_eps_derivatives_vanish(self):
        op = catalog.wave("1", 2)
        _, _, diag, ph = frame_tools(op)
        psi = PsiFunction.from_operator(op)

        def profile_at(xi):
            return extract_profile(integrate_z(diag, ph, xi, 10.0), psi, 1e-6)

        report = derivative_bounds_probe(profile_at, psi, [[1.0, 0.5]], (1, 0), t_ladder=(5.0,))
        assert report.eps_constant == 0.0
        assert math.isfinite(report.alpha_constant)


class TestTables:
    def test_direct_and_asymptotic_amplitudes_agree(self):
        _, _, diag, ph = frame_tools(catalog.wave(BUMPY, 2))
        psi = PsiFunction.from_operator(diag.op)
        times = np.array([0.0, 3.0, 10.0, -4.0])
        rhos = np.array([0.5, 1.0, 2.0])
        args = (diag, ph, [1.0, 0.0], rhos, times)
        asymptotic = ray_amplitudes(*args, "asymptotic", 40.0, 1e-10, psi)
        direct = ray_amplitudes(*args, "direct", 40.0, 1e-10, psi)
        np.testing.assert_allclose(asymptotic.values, direct.values, atol=1e-6)

    def test_unknown_method(self):
        _, _, diag, ph = frame_tools(catalog.wave(BUMPY, 2))
        with pytest.raises(ConfigError):
            ray_amplitudes(diag, ph, [1.0, 0.0], [1.0], [1.0], "euler", 40.0, 1e-10)

    def test_interpolation_on_radii(self):
        _, _, diag, ph = frame_tools(catalog.wave(BUMPY, 2))
        rhos = np.linspace(0.5, 2.0, 31)
        table = ray_amplitudes(diag, ph, [1.0, 0.0], rhos, [2.0], "asymptotic", 40.0, 1e-10)
        exact = ray_amplitudes(diag, ph, [1.0, 0.0], [1.23], [2.0], "asymptotic", 40.0, 1e-10)
        np.testing.assert_allclose(table.at(0, [1.23])[0], exact.values[0, 0], atol=1e-5)
