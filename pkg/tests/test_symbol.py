import json
import math

import numpy as np
import pytest

from app.errors import ConfigError, NonHyperbolic, RootCollision
from app.symbol import (
    characteristic_roots,
    default_certificate,
    eval_symbol,
    hyperbolicity_certificate,
    limiting_roots,
    load_operator,
    operator_from_dict,
    root_time_derivative,
    roots_batch,
    sphere_directions,
)
from app.symbol import catalog
from tests.conftest import varying_bi_wave, varying_triple


class TestOperator:
    def test_eval_symbol(self):
        assert eval_symbol(catalog.wave("1", 1), 0.0, 2.0, [1.0]) == pytest.approx(3.0)
        assert eval_symbol(catalog.triple(2), 0.0, 1.0, [1.0, 0.0]) == pytest.approx(0.0)
        assert eval_symbol(catalog.wave("1 + exp(-t^2)", 1), 0.0, 0.0, [1.0]) == pytest.approx(-2.0)

    def test_from_dict(self):
        op = operator_from_dict({"m": 2, "n": 1, "coeffs": [{"nu": [2], "j": 0, "expr": "-4"}]})
        np.testing.assert_allclose(characteristic_roots(op, 0.0, [1.0]), [2.0, -2.0])

    def test_empty_table_rejected(self):
        with pytest.raises(ConfigError):
            operator_from_dict({"m": 2, "n": 1, "coeffs": []})

    def test_homogeneity_enforced(self):
        with pytest.raises(ConfigError, match="homogeneity"):
            operator_from_dict({"m": 2, "n": 1, "coeffs": [{"nu": [1], "j": 0, "expr": "1"}]})

    def test_duplicate_coefficient(self):
        entry = {"nu": [2], "j": 0, "expr": "-1"}
        with pytest.raises(ConfigError, match="Duplicate"):
            operator_from_dict({"m": 2, "n": 1, "coeffs": [entry, entry]})

    def test_load_operator(self, tmp_path):
        path = tmp_path / "wave.json"
        path.write_text(json.dumps({"m": 2, "n": 2, "coeffs": [
            {"nu": [2, 0], "j": 0, "expr": "-1"},
            {"nu": [0, 2], "j": 0, "expr": "-1"},
        ]}))
        op = load_operator(str(path))
        assert (op.m, op.n) == (2, 2)
        assert op.is_constant

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_operator(str(tmp_path / "absent.json"))

    def test_isotropy(self):
        assert catalog.wave("1 + exp(-t^2)", 2).is_isotropic()
        assert not catalog.anisotropic_wave(("1", "4")).is_isotropic()


class TestRoots:
    def test_wave(self):
        np.testing.assert_allclose(characteristic_roots(catalog.wave("4", 2), 0.0, [1.0, 0.0]), [2.0, -2.0])

    def test_triple(self):
        np.testing.assert_allclose(characteristic_roots(catalog.triple(2), 0.0, [3.0, 4.0]), [5.0, 0.0, -5.0],
                                   atol=1e-12)

    def test_bi_wave(self):
        np.testing.assert_allclose(characteristic_roots(catalog.bi_wave(2), 0.0, [1.0, 0.0]),
                                   [2.0, 1.0, -1.0, -2.0], atol=1e-12)

    def test_varying_products(self):
        c = math.sqrt(1.0 + math.exp(-0.25))
        np.testing.assert_allclose(characteristic_roots(varying_bi_wave(), 0.5, [0.0, 1.0]),
                                   [2.0 * c, 1.0, -1.0, -2.0 * c], atol=1e-10)
        np.testing.assert_allclose(characteristic_roots(varying_triple(), 0.5, [3.0, 4.0]),
                                   [5.0 * c, 0.0, -5.0 * c], atol=1e-10)

    def test_homogeneous_of_degree_one(self):
        op = catalog.bi_wave(2)
        xi = np.array([0.3, -0.7])
        base = characteristic_roots(op, 0.0, xi)
        for s in (0.5, 2.0, 10.0):
            np.testing.assert_allclose(characteristic_roots(op, 0.0, s * xi), s * base, rtol=1e-10)

    def test_batched_shapes(self):
        op = catalog.wave("1 + exp(-t^2)", 2)
        directions = sphere_directions(2, 16)
        roots = roots_batch(op, np.linspace(0, 1, 5)[:, None], directions[None, :, :])
        assert roots.shape == (5, 16, 2)
        assert np.all(roots[..., 0] > roots[..., 1])

    def test_complex_roots(self):
        op = operator_from_dict({"m": 2, "n": 1, "coeffs": [{"nu": [2], "j": 0, "expr": "1"}]})
        with pytest.raises(NonHyperbolic):
            characteristic_roots(op, 0.0, [1.0])

    def test_zero_frequency_rejected(self):
        with pytest.raises(ConfigError):
            characteristic_roots(catalog.wave("1", 2), 0.0, [0.0, 0.0])


class TestCertificate:
    def test_constant_wave(self):
        roots = default_certificate(catalog.wave("1", 2))
        assert roots.separation == pytest.approx(2.0)
        assert roots.bound_constant == pytest.approx(1.0)

    def test_bumpy_wave(self):
        roots = default_certificate(catalog.wave("1 + exp(-t^2)", 2))
        assert roots.separation == pytest.approx(2.0, abs=1e-6)
        assert roots.bound_constant == pytest.approx(math.sqrt(2.0))

    def test_double_root(self):
        with pytest.raises(RootCollision) as info:
            hyperbolicity_certificate(catalog.double_root(), np.linspace(-1, 1, 5), 16)
        assert info.value.exit_code == 2


class TestRootDerivatives:
    def test_constant_coefficients(self):
        assert root_time_derivative(catalog.wave("1", 2), 3.0, [1.0, 0.0], 0) == 0.0

    def test_bumpy_wave(self):
        op = catalog.wave("1 + exp(-t^2)", 2)
        # c' = (c²)'/(2c) on the positive branch
        expected = -math.exp(-1.0) / math.sqrt(1.0 + math.exp(-1.0))
        assert root_time_derivative(op, 1.0, [1.0, 0.0], 0) == pytest.approx(expected, rel=1e-10)
        assert root_time_derivative(op, 1.0, [1.0, 0.0], 1) == pytest.approx(-expected, rel=1e-10)
        assert root_time_derivative(op, 0.0, [1.0, 0.0], 0) == pytest.approx(0.0, abs=1e-14)

    def test_matches_finite_differences(self):
        op = catalog.anisotropic_wave(("1 + exp(-t^2)", "2 + 1/(1+t^2)"))
        xi = np.array([0.6, 0.8])
        h = 1e-6
        for k in range(op.m):
            numeric = (characteristic_roots(op, 0.7 + h, xi)[k] - characteristic_roots(op, 0.7 - h, xi)[k]) / (2 * h)
            assert root_time_derivative(op, 0.7, xi, k) == pytest.approx(numeric, rel=1e-6)

    @pytest.mark.parametrize("make", [
        lambda: catalog.wave("1 + exp(-t^2)", 2), varying_triple, varying_bi_wave,
    ], ids=["bumpy wave", "varying triple", "varying bi-wave"])
    def test_random_points_match_finite_differences(self, make, rng):
        op = make()
        h = 1e-5
        for _ in range(100):
            t = rng.uniform(-3.0, 3.0)
            direction = rng.standard_normal(2)
            xi = rng.uniform(0.5, 3.0) * direction / np.linalg.norm(direction)
            k = int(rng.integers(op.m))
            numeric = (characteristic_roots(op, t + h, xi)[k] - characteristic_roots(op, t - h, xi)[k]) / (2 * h)
            assert root_time_derivative(op, t, xi, k) == pytest.approx(numeric, rel=1e-6, abs=1e-8)


class TestLimits:
    def test_bumpy_wave(self):
        limits = limiting_roots(catalog.wave("1 + exp(-t^2)", 2))
        np.testing.assert_allclose(limits.plus([1.0, 0.0]), [1.0, -1.0], atol=1e-8)
        np.testing.assert_allclose(limits.minus([0.0, 3.0]), [3.0, -3.0], atol=1e-8)

    def test_constant_operator(self):
        limits = limiting_roots(catalog.wave("4", 2))
        for plus, minus in limits.limit_coeffs.values():
            assert plus == minus == -4.0

    def test_rational_coefficient(self):
        limits = limiting_roots(catalog.wave("4 + 1/(1+t^2)", 2))
        assert limits.plus([1.0, 0.0])[0] == pytest.approx(2.0, abs=1e-8)

    def test_roots_approach_limits(self):
        op = catalog.wave("1 + exp(-t^2)", 2)
        limits = limiting_roots(op)
        xi = np.array([1.0, 0.0])
        gaps = [abs(characteristic_roots(op, t, xi)[0] - limits.plus(xi)[0]) for t in (10.0, 20.0, 40.0)]
        assert max(gaps) < 1e-8
