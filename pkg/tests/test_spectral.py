import math

import numpy as np
import pytest
from scipy import integrate

from app.coeffs.moments import PsiFunction
from app.errors import ConfigError
from app.spectral import (
    coupling,
    coupling_constant,
    dump_frame,
    energy_check,
    phases,
    propagate_companion,
    unit_directions,
)
from app.symbol import catalog
from tests.conftest import frame_tools, varying_bi_wave


class TestCompanion:
    def test_companion_matrix(self):
        _, cs, _, _ = frame_tools(catalog.wave("4", 2))
        np.testing.assert_allclose(cs.H(0.0, [3.0, 0.0]), [[0.0, 1.0], [4.0, 0.0]])
        np.testing.assert_allclose(cs.D(0.0, [0.0, 5.0]), np.diag([2.0, -2.0]))

    def test_diagonalizer_rows_are_left_eigenvectors(self):
        op = catalog.bi_wave(2)
        _, cs, diag, _ = frame_tools(op)
        xi = np.array([0.6, -0.8])
        frame = diag.frame(0.0, xi)
        np.testing.assert_allclose(frame.N @ cs.H(0.0, xi), np.diag(frame.mu) @ frame.N, atol=1e-12)
        np.testing.assert_allclose(frame.N_inv @ frame.N, np.eye(op.m), atol=1e-12)

    @pytest.mark.parametrize("make", [
        lambda: catalog.bi_wave(2), lambda: catalog.wave("1 + exp(-t^2)", 2), varying_bi_wave,
    ], ids=["bi-wave", "bumpy wave", "varying bi-wave"])
    def test_random_frames(self, make, rng):
        op = make()
        _, cs, diag, _ = frame_tools(op)
        for _ in range(500):
            t = rng.uniform(-10.0, 10.0)
            xi = rng.standard_normal(2)
            frame = diag.frame(t, xi)
            np.testing.assert_allclose(frame.N @ cs.H(t, xi), np.diag(frame.mu) @ frame.N, rtol=0, atol=1e-9)
            np.testing.assert_allclose(frame.N_inv @ frame.N, np.eye(op.m), rtol=0, atol=1e-9)
            assert abs(np.linalg.det(frame.N)) >= diag.det_lower_bound * (1.0 - 1e-9)

    def test_wave_determinant(self):
        _, _, diag, _ = frame_tools(catalog.wave("4", 2))
        assert np.linalg.det(diag.N(0.0, [1.0, 0.0])) == pytest.approx(4.0)
        assert diag.det_lower_bound == pytest.approx(4.0)

    def test_time_derivative_of_n(self):
        _, _, diag, _ = frame_tools(catalog.wave("1 + exp(-t^2)", 2))
        h = 1e-6
        xi = [0.0, 1.0]
        numeric = (diag.N(0.8 + h, xi) - diag.N(0.8 - h, xi)) / (2 * h)
        np.testing.assert_allclose(diag.dN(0.8, xi), numeric, atol=1e-8)

    def test_zero_direction(self):
        with pytest.raises(ConfigError):
            unit_directions([0.0, 0.0])

    def test_propagator_constant_wave(self):
        _, cs, _, _ = frame_tools(catalog.wave("1", 1))
        t = np.array([0.0, 0.5, 2.0])
        V = propagate_companion(cs, [1.0], [1.5], t)[:, 0]
        H = np.array([[0.0, 1.0], [1.0, 0.0]])
        for i, s in enumerate(t):
            expected = math.cos(1.5 * s) * np.eye(2) + 1j * math.sin(1.5 * s) * H
            np.testing.assert_allclose(V[i], expected, atol=1e-9)


class TestPhases:
    def test_constant_wave(self):
        _, _, _, ph = frame_tools(catalog.wave("4", 2))
        np.testing.assert_allclose(phases(ph, 3.0, [1.0, 0.0]), [6.0, -6.0])

    def test_bumpy_wave_against_quadrature(self):
        _, _, _, ph = frame_tools(catalog.wave("1 + exp(-t^2)", 2))
        expected, _ = integrate.quad(lambda s: math.sqrt(1.0 + math.exp(-s * s)), 0.0, 1.0, epsabs=1e-12)
        theta = phases(ph, 1.0, [1.0, 0.0])
        assert theta[0] == pytest.approx(expected, abs=1e-8)
        assert theta[1] == pytest.approx(-expected, abs=1e-8)

    def test_linear_in_frequency_and_odd_in_time(self):
        _, _, _, ph = frame_tools(catalog.wave("1 + exp(-t^2)", 2))
        base = phases(ph, 7.3, [0.6, 0.8])
        np.testing.assert_allclose(phases(ph, 7.3, [1.2, 1.6]), 2.0 * base, rtol=1e-12)
        np.testing.assert_allclose(phases(ph, -7.3, [0.6, 0.8]), -base, rtol=1e-8)

    def test_long_times_grow_the_table(self):
        _, _, _, ph = frame_tools(catalog.wave("1 + exp(-t^2)", 2))
        early = phases(ph, 1.0, [1.0, 0.0])
        late = phases(ph, 80.0, [1.0, 0.0])
        # c ≡ 1 beyond the bump
        assert late[0] - phases(ph, 70.0, [1.0, 0.0])[0] == pytest.approx(10.0, abs=1e-8)
        np.testing.assert_allclose(phases(ph, 1.0, [1.0, 0.0]), early, rtol=1e-12)


class TestCoupling:
    def test_constant_coefficients(self):
        _, _, diag, ph = frame_tools(catalog.wave("1", 2))
        np.testing.assert_allclose(coupling(diag, ph, 2.0, [1.0, 1.0]), np.zeros((2, 2)))

    def test_wave_entries(self):
        _, _, diag, ph = frame_tools(catalog.wave("1 + exp(-t^2)", 2))
        c2 = 1.0 + math.exp(-1.0)
        # |c'|/(2c) with c' = −e^{−1}/c
        expected = math.exp(-1.0) / (2.0 * c2)
        np.testing.assert_allclose(np.abs(coupling(diag, ph, 1.0, [3.0, 4.0])), expected, rtol=1e-10)

    def test_bounded_by_psi(self):
        op = catalog.wave("1 + exp(-t^2)", 2)
        _, _, diag, ph = frame_tools(op)
        psi = PsiFunction.from_operator(op)
        constant = coupling_constant(diag, psi)
        for t in (-2.0, 0.5, 1.5):
            assert np.linalg.norm(coupling(diag, ph, t, [1.0, 0.0]), ord=2) <= constant * psi(t) * (1 + 1e-12)

    def test_dump_rows(self):
        _, _, diag, ph = frame_tools(catalog.wave("1 + exp(-t^2)", 2))
        rows = dump_frame(diag, ph, np.linspace(-1, 1, 5), [1.0, 0.0])
        assert len(rows) == 5
        assert {"t", "D0", "D1", "N01", "C10_re", "C10_im"} <= set(rows[0])


class TestEnergy:
    def test_constant_coefficients_conserve_w(self):
        _, cs, diag, _ = frame_tools(catalog.wave("1", 2))
        report = energy_check(cs, diag, [1.0, 0.0], 5.0, samples=5, points=201)
        assert report.holds
        assert report.w_drift < 1e-7
        assert report.exponent == 0.0

    def test_bumpy_wave(self):
        _, cs, diag, _ = frame_tools(catalog.wave("1 + exp(-t^2)", 2))
        report = energy_check(cs, diag, [2.0, 0.0], 5.0, samples=5, points=501)
        assert report.holds
        assert report.exponent_finite

    def test_plain_exponent_integrates_dn(self):
        _, cs, diag, _ = frame_tools(catalog.wave("1 + exp(-t^2)", 2))
        report = energy_check(cs, diag, [2.0, 0.0], 5.0, samples=5, points=501)
        times = np.linspace(0.0, 5.0, 501)
        norms = [np.linalg.norm(diag.dN(t, [2.0, 0.0]), ord=2) for t in times]
        assert report.plain_exponent == pytest.approx(integrate.trapezoid(norms, times), rel=1e-10)
        assert 0.0 < report.plain_exponent < math.inf
        assert report.to_dict()["plain_exponent"] == report.plain_exponent

    def test_random_frequencies(self, rng):
        _, cs, diag, _ = frame_tools(catalog.wave("1 + exp(-t^2)", 2))
        for _ in range(20):
            xi = rng.uniform(0.2, 4.0) * unit_directions(rng.standard_normal(2))[1]
            report = energy_check(cs, diag, xi, 50.0, samples=20)
            assert report.holds
            assert report.max_ratio <= 1.0 + 1e-3

