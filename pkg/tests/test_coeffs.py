import math

import numpy as np
import pytest

from app.coeffs import (
    PsiFunction,
    constant_coefficient,
    evaluate,
    moment_check,
    parse_coefficient,
    parse_expression,
    psi,
)
from app.errors import EvaluationError, ExpressionError
from app.symbol import catalog


class TestParse:
    def test_literal_and_exp(self):
        expr = parse_coefficient("1 + 0.5*exp(-t^2)")
        assert expr.eval(0.0) == pytest.approx(1.5)
        assert expr.prime(0.0) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("source,t,expected", [
        ("t^3", 2.0, 8.0),
        ("exp(-t^2)", 0.0, 1.0),
        ("1/(1+t^2)", 3.0, 0.1),
    ])
    def test_values(self, source, t, expected):
        assert evaluate(parse_coefficient(source), t) == pytest.approx(expected, rel=1e-14)

    def test_symbolic_derivative_matches_differences(self):
        expr = parse_coefficient("2/(1+t^2)")
        assert expr.prime(1.0) == pytest.approx(-1.0, rel=1e-14)
        h = 1e-5
        t = np.linspace(-3.0, 3.0, 13)
        numeric = (expr.eval(t + h) - expr.eval(t - h)) / (2 * h)
        np.testing.assert_allclose(expr.prime(t), numeric, atol=1e-8)

    def test_unary_minus_binds_looser_than_power(self):
        assert parse_coefficient("-t^2").eval(3.0) == pytest.approx(-9.0)

    def test_negative_integer_power(self):
        assert parse_coefficient("(1+t)^-2").eval(1.0) == pytest.approx(0.25)

    def test_array_evaluation(self):
        expr = parse_coefficient("t^2")
        np.testing.assert_allclose(expr.eval(np.array([1.0, 2.0, 3.0])), [1.0, 4.0, 9.0])

    def test_unknown_identifier_reports_offset(self):
        with pytest.raises(ExpressionError) as info:
            parse_coefficient("1 + s")
        assert info.value.offset == 4

    def test_unexpected_character(self):
        with pytest.raises(ExpressionError):
            parse_coefficient("1 + $")

    def test_trailing_operator(self):
        with pytest.raises(ExpressionError):
            parse_coefficient("1 +")

    def test_division_by_zero_raises(self):
        with pytest.raises(EvaluationError):
            parse_coefficient("1/t").eval(0.0)

    def test_multivariate_expression(self):
        node = parse_expression("xi1^4 + xi2^4", ("xi1", "xi2"))
        assert node.evaluate([np.float64(1.0), np.float64(2.0)]) == pytest.approx(17.0)

    def test_constant_detection(self):
        assert parse_coefficient("2*3 - 1").is_constant
        assert not parse_coefficient("exp(-t^2)").is_constant
        assert constant_coefficient(4.0).eval(12.0) == pytest.approx(4.0)


class TestMoments:
    def test_constant_has_zero_moment(self):
        report = moment_check(parse_coefficient("3"), 5, 1e-8)
        assert report.converged
        assert report.value == 0.0

    def test_rational_moment_closed_form(self):
        # ∫|a'| over each half-line is a(0) − a(∞) = 2
        report = moment_check(parse_coefficient("2/(1+t^2)"), 0, 1e-6)
        assert report.converged
        assert report.value == pytest.approx(4.0, abs=1e-5)

    def test_gaussian_tails_dominate_weights(self):
        report = moment_check(parse_coefficient("1 + exp(-t^2)"), 3, 1e-6)
        assert report.converged
        assert math.isfinite(report.value)

    def test_moments_grow_with_order(self):
        expr = parse_coefficient("1/(1+t^2)")
        values = [moment_check(expr, r, 1e-6).value for r in (0, 1)]
        assert values[0] <= values[1]

    def test_non_integrable_derivative_flagged(self):
        assert not moment_check(parse_coefficient("t"), 0, 1e-6).converged

    def test_borderline_moment_diverges(self):
        # (1+|t|)² a'(t) ~ 2/|t| is not integrable
        assert not moment_check(parse_coefficient("1/(1+t^2)"), 2, 1e-6).converged


class TestPsi:
    def test_constant_operator(self, constant_wave):
        assert psi(constant_wave, 1.3) == 0.0
        assert PsiFunction.from_operator(constant_wave).is_zero

    def test_bumpy_wave(self):
        op = catalog.wave("1 + exp(-t^2)", 1)
        assert psi(op, 0.0) == pytest.approx(0.0, abs=1e-15)
        assert psi(op, 1.0) == pytest.approx(2.0 * math.exp(-1.0), rel=1e-12)

    def test_tail_integral(self):
        function = PsiFunction.from_operator(catalog.wave("1 + exp(-t^2)", 1))
        # ∫_0^∞ 2t e^{−t²} dt = 1
        assert function.tail_integral(0.0) == pytest.approx(1.0, rel=1e-8)
