import math

import numpy as np
import pytest

from app.cauchy import (
    CauchyData,
    CauchySolver,
    DecayReport,
    SpectralGrid,
    conjugate,
    data_cost,
    decay_experiment,
    index_gap,
    intermediate_cost,
    low_frequency_exponent,
    low_frequency_grid,
    lq_norm,
    predicted_exponent,
    profile_radius,
    required_moment_orders,
    small_time_check,
    small_time_cost,
    sobolev_data_norm,
    sobolev_norm,
    solve,
    zone_multipliers,
    zone_split,
)
from app.errors import BoxTooSmall, CertificateMissing, ConfigError, ResolutionError
from app.symbol import catalog, default_certificate
from tests.conftest import BUMPY

GAUSSIAN = [{"kind": "gaussian", "k": 0}]


def _line(points=256, box=40.0):
    return SpectralGrid(1, points, box)


class TestGrid:
    def test_axis_is_centred(self):
        grid = _line(8, 8.0)
        assert grid.axis[4] == 0.0
        assert grid.dx == 1.0
        assert grid.nyquist == pytest.approx(math.pi)

    @pytest.mark.parametrize("n,points,box", [(4, 64, 10.0), (1, 100, 10.0), (1, 4, 10.0), (2, 64, 0.0)])
    def test_invalid(self, n, points, box):
        with pytest.raises(ConfigError):
            SpectralGrid(n, points, box)

    def test_auto_size(self):
        grid = SpectralGrid.auto(1, 1.0, 10.0, 8.0)
        assert grid.box == pytest.approx(39.6)
        assert grid.points == 128
        grid.check_resolution(4.0)

    def test_continuous_transform_scaling(self):
        grid = _line()
        data = CauchyData.from_specs(grid, 2, GAUSSIAN)
        assert data.spectra[0, 0].real == pytest.approx(math.sqrt(2.0 * math.pi), rel=1e-12)
        np.testing.assert_allclose(grid.inverse(data.spectra[0]).real, data.samples[0].real, atol=1e-14)

    def test_plane_transform_scaling(self):
        grid = SpectralGrid(2, 64, 24.0)
        data = CauchyData.from_specs(grid, 2, GAUSSIAN)
        assert data.spectra[0, 0, 0].real == pytest.approx(2.0 * math.pi, rel=1e-12)


class TestData:
    def test_profile_radius(self):
        assert profile_radius([{"kind": "bump", "width": 2.0, "center": [1.0, 0.0]}], 2) == pytest.approx(3.0)
        assert profile_radius(GAUSSIAN, 1) == pytest.approx(8.0)

    def test_bump_support(self):
        grid = _line()
        data = CauchyData.from_specs(grid, 2, [{"kind": "bump", "width": 2.0, "k": 1, "amplitude": 3.0}])
        assert np.all(data.samples[0] == 0)
        assert data.samples[1, 128].real == pytest.approx(3.0)
        assert np.all(data.samples[1, np.abs(grid.axis) >= 2.0] == 0)

    def test_radius_from_samples(self):
        grid = _line()
        samples = np.stack([np.exp(-0.5 * grid.axis ** 2), np.zeros(grid.points)])
        data = CauchyData.from_samples(grid, samples)
        assert data.radius == pytest.approx(8.0, abs=grid.dx)

    def test_time_derivatives_are_rotated(self):
        grid = _line()
        g = np.stack([np.exp(-0.5 * grid.axis ** 2), np.exp(-0.5 * grid.axis ** 2)])
        data = CauchyData.from_time_derivatives(grid, g)
        np.testing.assert_allclose(data.samples[1], -1j * g[1])

    @pytest.mark.parametrize("spec", [
        {"kind": "box"}, {"kind": "gaussian", "k": 2}, {"width": -1.0}, {"center": [0.0, 0.0]},
    ])
    def test_bad_specs(self, spec):
        with pytest.raises(ConfigError):
            CauchyData.from_specs(_line(), 2, [spec])

    def test_shape_mismatch(self):
        with pytest.raises(ConfigError):
            CauchyData.from_samples(_line(), np.zeros((2, 128)))

    def test_resample_onto_same_grid(self):
        grid = _line()
        data = CauchyData.from_specs(grid, 2, GAUSSIAN)
        again = data.resampled(grid)
        np.testing.assert_allclose(again.spectra, data.spectra, atol=1e-12)
        np.testing.assert_allclose(again.samples, data.samples, atol=1e-12)

    def test_resample_onto_wide_box(self):
        data = CauchyData.from_specs(_line(), 2, GAUSSIAN)
        wide = SpectralGrid(1, 64, 400.0)
        moved = data.resampled(wide)
        k = wide.wavenumbers
        np.testing.assert_allclose(moved.spectra[0], np.sqrt(2 * np.pi) * np.exp(-0.5 * k ** 2), atol=1e-10)
        np.testing.assert_allclose(moved.spectra[1], 0.0, atol=1e-14)
        assert moved.radius == data.radius

    def test_resample_plane(self):
        data = CauchyData.from_specs(SpectralGrid(2, 64, 24.0), 1, GAUSSIAN)
        wide = SpectralGrid(2, 16, 100.0)
        moved = data.resampled(wide)
        expected = 2 * np.pi * np.exp(-0.5 * wide.xi_norm() ** 2)
        np.testing.assert_allclose(moved.spectra[0], expected, atol=1e-10)

    def test_resample_dimension_mismatch(self):
        data = CauchyData.from_specs(_line(), 2, GAUSSIAN)
        with pytest.raises(ConfigError):
            data.resampled(SpectralGrid(2, 16, 40.0))


class TestNorms:
    def setup_method(self):
        self.grid = SpectralGrid(2, 128, 32.0)
        self.data = CauchyData.from_specs(self.grid, 2, GAUSSIAN)

    def test_gaussian_lebesgue(self):
        f = self.data.samples[0]
        assert lq_norm(f, self.grid, 2) == pytest.approx(math.sqrt(math.pi), rel=1e-10)
        assert lq_norm(f, self.grid, 1) == pytest.approx(2.0 * math.pi, rel=1e-10)
        assert lq_norm(f, self.grid, math.inf) == pytest.approx(1.0)

    def test_plancherel(self):
        assert sobolev_norm(self.data.spectra[0], self.grid, 0) == pytest.approx(
            lq_norm(self.data.samples[0], self.grid, 2), rel=1e-12)

    def test_gradient_norm(self):
        # ∫|∇f|² = ∫ r² e^{−r²} dx = π
        assert sobolev_norm(self.data.spectra[0], self.grid, 1) == pytest.approx(math.sqrt(math.pi), rel=1e-10)

    def test_laplacian_shifts_order(self):
        spectrum = self.data.spectra[0]
        laplacian = self.grid.xi_norm() ** 2 * spectrum
        assert sobolev_norm(laplacian, self.grid, 0) == pytest.approx(sobolev_norm(spectrum, self.grid, 2),
                                                                       rel=1e-12)

    def test_inhomogeneous_weight(self):
        spectrum = self.data.spectra[0]
        value = sobolev_norm(spectrum, self.grid, 1, homogeneous=False)
        assert value ** 2 == pytest.approx(2.0 * math.pi, rel=1e-10)

    def test_data_norm_sums_orders(self):
        assert sobolev_data_norm(self.data, 1) == pytest.approx(sobolev_norm(self.data.spectra[0], self.grid, 1))
        with pytest.raises(ConfigError):
            sobolev_data_norm(self.data, 0, k=2)

    def test_negative_order_with_mean(self):
        with pytest.raises(ConfigError, match="not integrable"):
            sobolev_norm(self.data.spectra[0], self.grid, -1)

    def test_lq_exponent(self):
        with pytest.raises(ConfigError):
            lq_norm(self.data.samples[0], self.grid, 0.5)


class TestZones:
    def test_parts_add_up(self):
        grid = SpectralGrid(2, 64, 24.0)
        spectrum = CauchyData.from_specs(grid, 2, GAUSSIAN).spectra[0]
        split = zone_split(spectrum, grid, 7.0)
        np.testing.assert_allclose(sum(split.spectra), spectrum, atol=1e-15 * np.max(np.abs(spectrum)))
        total = split.u1 + split.u2 + split.u3
        np.testing.assert_allclose(total, grid.inverse(spectrum), atol=1e-14)

    def test_initial_low_zone(self):
        grid = _line(256, 200.0)
        low, middle = zone_multipliers(grid, 0.0)
        rho = grid.xi_norm()
        assert np.all(low[rho <= 0.5] == 1.0)
        assert np.all(low[rho >= 1.0] == 0.0)
        assert np.all(middle[rho <= 0.5] == 0.0)

    def test_low_zone_shrinks(self):
        grid = _line(256, 200.0)
        low, _ = zone_multipliers(grid, 9.0)
        assert np.all(low[grid.xi_norm() >= 0.1] == 0.0)

    def test_low_frequency_grid(self):
        grid = low_frequency_grid(1, 10.0, 1.0, 8.0)
        assert grid.points == 128
        assert grid.box == pytest.approx(2 * math.pi * 8 * 11)
        # the support |ξ| ≤ 1/11 spans eight lattice spacings
        assert 11.0 * grid.dxi == pytest.approx(1.0 / 8)
        assert grid.nyquist == pytest.approx(8.0 / 11)

    def test_low_frequency_grid_holds_the_cone(self):
        grid = low_frequency_grid(2, 10.0, 30.0, 8.0)
        assert grid.points == 256
        grid.check_box(30.0, 10.0, 8.0, 0.1)
        assert 11.0 * grid.dxi < 1.0 / 8


class TestRates:
    def test_index_gap(self):
        assert index_gap(1, math.inf) == 1.0
        assert index_gap(2, 2) == 0.0
        with pytest.raises(ConfigError):
            index_gap(2, 1)

    def test_conjugate(self):
        assert conjugate(1) == math.inf
        assert conjugate(4.0 / 3.0) == pytest.approx(4.0)
        assert conjugate(2) == 2.0

    @pytest.mark.parametrize("n,gamma,gamma0,convex,expected", [
        (2, 2, 2, True, 0.5),
        (3, 2, 2, True, 1.0),
        (3, 4, 4, True, 0.5),
        (2, 4, 4, False, 0.25),
        (1, None, None, True, 0.0),
    ])
    def test_predicted_exponent(self, n, gamma, gamma0, convex, expected):
        assert predicted_exponent(n, gamma, gamma0, convex, 1, math.inf) == pytest.approx(expected)

    def test_missing_indices(self):
        with pytest.raises(ConfigError):
            predicted_exponent(2, None, 2, True, 1, math.inf)
        with pytest.raises(ConfigError):
            predicted_exponent(2, 2, None, False, 1, math.inf)

    def test_costs(self):
        assert low_frequency_exponent(2, 1, math.inf) == 2.0
        assert data_cost(2, 2, 2, True, 1, math.inf) == pytest.approx(2.5)
        assert data_cost(3, 2, 2, True, 1, math.inf) == pytest.approx(4.0)
        assert data_cost(2, None, 4, False, 1, math.inf) == pytest.approx(2.75)
        assert data_cost(1, None, None, True, 1, math.inf) == 1.0
        assert intermediate_cost(2, 2, 1, math.inf) == pytest.approx(1.5)
        assert small_time_cost(3, 1, math.inf) == 3.0

    def test_moment_orders(self):
        assert required_moment_orders(3, 2) == [0, 1, 2]
        assert required_moment_orders(2, 2) == [0, 1]
        assert required_moment_orders(1, None) == [0, 1]


class TestSolver:
    def test_dalembert(self):
        op = catalog.wave("1", 1)
        grid = _line()
        data = CauchyData.from_specs(grid, 2, GAUSSIAN)
        solution = solve(op, grid, data, [0.0, 5.0], roots=default_certificate(op))
        x = grid.axis
        np.testing.assert_allclose(solution.field(0), data.samples[0], atol=1e-12)
        expected = 0.5 * (np.exp(-0.5 * (x - 5.0) ** 2) + np.exp(-0.5 * (x + 5.0) ** 2))
        np.testing.assert_allclose(solution.field(1).real, expected, atol=1e-6)
        # ∂_t u = ½(−g'(x−t) + g'(x+t))
        velocity = 0.5 * ((x - 5.0) * np.exp(-0.5 * (x - 5.0) ** 2) - (x + 5.0) * np.exp(-0.5 * (x + 5.0) ** 2))
        np.testing.assert_allclose(solution.time_derivative(1, 1).real, velocity, atol=1e-6)

    def test_spatial_derivative(self):
        op = catalog.wave("1", 1)
        grid = _line()
        data = CauchyData.from_specs(grid, 2, GAUSSIAN)
        solution = solve(op, grid, data, [0.0], roots=default_certificate(op), alpha=[1])
        # D_x g = −i g' = i x g
        x = grid.axis
        np.testing.assert_allclose(solution.field(0), 1j * x * np.exp(-0.5 * x ** 2), atol=1e-10)

    def test_methods_agree_on_the_line(self):
        op = catalog.wave(BUMPY, 1)
        roots = default_certificate(op)
        grid = _line(128, 40.0)
        x = grid.axis
        g = np.stack([np.exp(-0.5 * x ** 2), x * np.exp(-0.5 * x ** 2)])
        data = CauchyData.from_time_derivatives(grid, g, radius=8.0)
        asymptotic = solve(op, grid, data, [3.0, -2.0], roots=roots)
        direct = solve(op, grid, data, [3.0, -2.0], method="direct_ode", roots=roots)
        np.testing.assert_allclose(asymptotic.spectra, direct.spectra, atol=1e-6)
        assert asymptotic.imag_defect() < 1e-8
        assert direct.imag_defect() < 1e-8

    def test_methods_agree_in_the_plane(self):
        op = catalog.wave(BUMPY, 2)
        roots = default_certificate(op)
        grid = SpectralGrid(2, 64, 24.0)
        data = CauchyData.from_specs(grid, 2, GAUSSIAN)
        asymptotic = solve(op, grid, data, [2.0], roots=roots)
        direct = solve(op, grid, data, [2.0], method="direct_ode", roots=roots)
        np.testing.assert_allclose(asymptotic.field(0), direct.field(0), atol=1e-6)

    def test_missing_certificate(self):
        op = catalog.wave("1", 1)
        grid = _line()
        data = CauchyData.from_specs(grid, 2, GAUSSIAN)
        with pytest.raises(CertificateMissing) as info:
            solve(op, grid, data, [1.0])
        assert info.value.exit_code == 2
        with pytest.raises(CertificateMissing):
            solve(op, grid, data, [1.0], roots=default_certificate(catalog.wave("4", 1)))

    def test_box_too_small(self):
        op = catalog.wave("1", 1)
        grid = _line(64, 10.0)
        data = CauchyData.from_specs(grid, 2, GAUSSIAN)
        with pytest.raises(BoxTooSmall) as info:
            solve(op, grid, data, [5.0], roots=default_certificate(op))
        assert info.value.exit_code == 4

    def test_under_resolved(self):
        op = catalog.wave("1", 1)
        grid = _line(8, 40.0)
        data = CauchyData.from_specs(grid, 2, GAUSSIAN)
        with pytest.raises(ResolutionError):
            solve(op, grid, data, [1.0], roots=default_certificate(op))

    def test_bad_arguments(self):
        op = catalog.wave("1", 1)
        roots = default_certificate(op)
        grid = _line()
        data = CauchyData.from_specs(grid, 2, GAUSSIAN)
        with pytest.raises(ConfigError):
            CauchySolver(op, grid, data, [1.0], roots, method="leapfrog")
        with pytest.raises(ConfigError):
            CauchySolver(op, grid, data, [1.0], roots, alpha=[1, 0])
        with pytest.raises(ConfigError):
            CauchySolver(op, grid, CauchyData.from_specs(grid, 3, GAUSSIAN), [1.0], roots)

    def test_band_limited_evolution(self):
        op = catalog.wave("1", 1)
        roots = default_certificate(op)
        grid = _line()
        data = CauchyData.from_specs(grid, 2, GAUSSIAN)
        banded = CauchySolver(op, grid, data, [3.0], roots, band=0.5).spectrum(0)
        rho = grid.xi_norm()
        inside = rho <= 0.5
        assert np.all(banded[:, ~inside] == 0)
        exact = np.cos(3.0 * rho) * data.spectra[0]
        np.testing.assert_allclose(banded[0, inside], exact[inside], atol=1e-6)

    def test_band_relaxes_resolution(self):
        op = catalog.wave("1", 1)
        grid = SpectralGrid(1, 16, 400.0)
        data = CauchyData.from_specs(_line(), 2, GAUSSIAN).resampled(grid)
        with pytest.raises(ResolutionError):
            CauchySolver(op, grid, data, [10.0], default_certificate(op))
        CauchySolver(op, grid, data, [10.0], default_certificate(op), band=0.05)


class TestExperiments:
    def test_energy_level_decay(self):
        op = catalog.wave("1", 1)
        grid = SpectralGrid(1, 1024, 256.0)
        data = CauchyData.from_specs(grid, 2, GAUSSIAN)
        times = [0.0, 10.0, 20.0, 40.0, 60.0, 80.0, 100.0]
        report = decay_experiment(op, grid, data, times, p=2)
        assert report.q == 2
        assert report.predicted["total"] == 0.0
        assert abs(report.fitted["total"]) < 0.02
        assert report.verdicts["total"] == "pass"
        # ‖u₁‖₂ ~ (1+t)^{-1/2}: the zone carries only |ξ| ≤ 1/(1+t)
        assert report.fitted["u1"] == pytest.approx(-0.5, abs=0.05)
        assert report.verdicts["u1"] == "pass"
        assert report.verdict == "pass"
        assert len(report.rows) == len(times)
        assert report.to_dict()["geometry"]["gamma"] is None

    def test_low_frequency_zone_on_the_line(self):
        op = catalog.wave("1", 1)
        grid = SpectralGrid.auto(1, 1.0, 100.0, 8.0)
        data = CauchyData.from_specs(grid, 2, GAUSSIAN)
        report = decay_experiment(op, grid, data, np.geomspace(10.0, 100.0, 8), p=1)
        assert report.predicted["u1"] == pytest.approx(1.0)
        assert report.windows["u1"] == pytest.approx([10.0, 100.0])
        assert report.fitted["u1"] <= -report.predicted["u1"] + 0.1
        assert report.fitted["u1"] == pytest.approx(-1.0, abs=0.1)
        assert report.verdicts == {"total": "pass", "u1": "pass", "u2": "pass", "u3": "pass"}
        assert report.verdict == "pass"

    def test_overall_verdict(self):
        def report(verdicts):
            return DecayReport(p=1.0, q=math.inf, l=0, method="asymptotic", predicted={}, fitted={},
                               verdicts=verdicts, windows={})

        assert report({"total": "pass", "u1": "pass"}).verdict == "pass"
        assert report({"total": "pass", "u1": "unresolved"}).verdict == "unresolved"
        assert report({"total": "fail", "u1": "unresolved"}).verdict == "fail"
        assert report({}).verdict == "unresolved"
        assert report({"total": "pass", "u1": "unresolved"}).to_dict()["verdict"] == "unresolved"

    def test_too_few_times_in_window(self):
        op = catalog.wave("1", 1)
        grid = SpectralGrid(1, 1024, 256.0)
        data = CauchyData.from_specs(grid, 2, GAUSSIAN)
        report = decay_experiment(op, grid, data, [1.0, 2.0, 20.0, 40.0], p=2)
        assert set(report.verdicts.values()) == {"unresolved"}
        assert report.fitted["u1"] is None
        assert report.verdict == "unresolved"

    def test_decay_runs_forward(self):
        op = catalog.wave("1", 1)
        grid = _line()
        data = CauchyData.from_specs(grid, 2, GAUSSIAN)
        with pytest.raises(ConfigError):
            decay_experiment(op, grid, data, [-1.0, 1.0], p=2)
        with pytest.raises(ConfigError):
            decay_experiment(op, grid, data, [1.0], p=2, l=2)

    def test_small_times(self):
        op = catalog.wave("1", 1)
        grid = _line()
        data = CauchyData.from_specs(grid, 2, GAUSSIAN)
        report = small_time_check(op, grid, data, [0.25, 0.5, 1.0], p=2)
        assert report.order == 0.0
        assert report.bounded
        assert not report.surrogate
        assert all(row["ratio"] <= 1.0 + 1e-9 for row in report.rows)

    def test_small_time_window(self):
        op = catalog.wave("1", 1)
        grid = _line()
        data = CauchyData.from_specs(grid, 2, GAUSSIAN)
        with pytest.raises(ConfigError):
            small_time_check(op, grid, data, [0.5, 2.0], p=2)

    @pytest.mark.slow
    def test_plane_wave_sup_norm(self):
        grid = SpectralGrid(2, 2048, 400.0)
        data = CauchyData.from_specs(grid, 2, GAUSSIAN)
        times = np.geomspace(10.0, 100.0, 8)
        slopes = []
        for speed in ("1", BUMPY):
            report = decay_experiment(catalog.wave(speed, 2), grid, data, times, p=1)
            assert report.predicted["total"] == pytest.approx(0.5)
            assert -0.6 < report.fitted["total"] < -0.4
            assert report.verdicts["total"] == "pass"
            assert report.verdicts["u1"] == "pass"
            slopes.append(report.fitted["total"])
        # the bumpy speed settles to 1, so both rates agree
        assert abs(slopes[0] - slopes[1]) <= 0.05
