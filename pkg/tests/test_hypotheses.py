"""Tests for grid hypothesis checks."""
import math

import pytest

from app.core.expressions import parse
from app.core.hypotheses import HypothesisCheck, HypothesisStatus


class TestDominance:
    """Test upper_j >= lower_j on the grid."""

    def test_verified(self):
        """Test 1 + sin^2 >= sin^2."""
        result = HypothesisCheck.check_dominance([parse("1 + sin(t)^2")], [parse("sin(t)^2")], (0.0, 10.0))
        assert result.status == HypothesisStatus.VERIFIED
        assert result.margin == pytest.approx(1.0)

    def test_violated_reports_worst_point(self):
        """Test that the worst point and the failing term are reported."""
        result = HypothesisCheck.check_dominance(
            [parse("1"), parse("0")], [parse("0"), parse("sin(t)")], (0.0, 2 * math.pi)
        )
        assert result.status == HypothesisStatus.VIOLATED
        assert result.worst_point == pytest.approx(math.pi / 2, abs=1e-2)
        assert result.margin == pytest.approx(-1.0, abs=1e-4)
        assert "2" in result.message

    def test_no_terms(self):
        """Test that an equation without terms passes."""
        result = HypothesisCheck.check_dominance([], [], (0.0, 1.0))
        assert result.verified

    def test_equal_coefficients(self):
        """Test that equality is dominance."""
        fn = parse("cos(t)")
        assert HypothesisCheck.check_dominance([fn], [fn], (0.0, 5.0)).verified


class TestNegativeCoefficients:
    """Test the sign condition on negative dominated coefficients."""

    def test_compensated_by_dominant(self):
        """Test r = -1 with r1 = 0."""
        result = HypothesisCheck.check_negative_coefficients(
            [parse("-1")], [parse("0")], [parse("t - 1")], (0.0, 5.0)
        )
        assert result.verified

    def test_excused_without_deviation(self):
        """Test r = -1 with r1 = -1 and alpha(t) = t."""
        result = HypothesisCheck.check_negative_coefficients(
            [parse("-1")], [parse("-1")], [parse("t")], (0.0, 5.0)
        )
        assert result.verified

    def test_violated(self):
        """Test r = -1 with r1 = -1 and a delay."""
        result = HypothesisCheck.check_negative_coefficients(
            [parse("-1")], [parse("-1")], [parse("t - 1")], (0.0, 5.0)
        )
        assert result.status == HypothesisStatus.VIOLATED
        assert result.worst_point == pytest.approx(0.0)


class TestNonnegative:
    """Test fn >= 0 on the grid."""

    def test_verified(self):
        """Test a positive forcing term."""
        result = HypothesisCheck.check_nonnegative(parse("cos(sin(ln(1 + t)))"), (0.0, 100.0), "nonnegative-forcing")
        assert result.verified
        assert result.margin > 0.5

    def test_violated(self):
        """Test sin on a full period."""
        result = HypothesisCheck.check_nonnegative(parse("sin(t)"), (0.0, 2 * math.pi), "nonnegative-forcing")
        assert result.status == HypothesisStatus.VIOLATED
        assert result.id == "nonnegative-forcing"
        assert result.worst_point == pytest.approx(1.5 * math.pi, abs=1e-2)


class TestUnboundedArguments:
    """Test the bounded-delay proxy for alpha_j(t) -> infinity."""

    def test_bounded_delay(self):
        """Test delays 1 and 2 on a window of length 100."""
        result = HypothesisCheck.check_unbounded_arguments([parse("t - 1"), parse("t - 2")], (0.0, 100.0))
        assert result.verified
        assert result.margin == pytest.approx(2.0)
        assert result.caveat is not None

    def test_delay_comparable_to_window(self):
        """Test alpha(t) = t/2, whose delay grows with t."""
        result = HypothesisCheck.check_unbounded_arguments([parse("t/2")], (0.0, 10.0))
        assert result.status == HypothesisStatus.NOT_VERIFIABLE


class TestForcingSignPattern:
    """Test the repeated sign pattern hypothesis."""

    def test_enough_patterns(self):
        """Test three patterns of sin(t/3) on [0, 30 pi]."""
        result, patterns = HypothesisCheck.check_forcing_sign_pattern(parse("sin(t/3)"), (0.0, 30 * math.pi))
        assert result.verified
        assert len(patterns) == 3
        assert result.worst_point == pytest.approx(21 * math.pi, abs=1e-6)

    def test_too_few_patterns(self):
        """Test that a short window fails."""
        result, patterns = HypothesisCheck.check_forcing_sign_pattern(
            parse("sin(t/3)"), (0.0, 12 * math.pi), repetitions=3
        )
        assert result.status == HypothesisStatus.VIOLATED
        assert len(patterns) == 1


class TestEvaluateComparison:
    """Test the shared coefficient hypotheses."""

    def test_nonoscillation_direction(self):
        """Test that the comparison coefficients must bound from above."""
        results = HypothesisCheck.evaluate_comparison(
            [parse("1")], [parse("2")], [parse("t - 1")], (0.0, 50.0), comparison_dominates=True
        )
        assert [r.id for r in results] == ["dominance", "negative-coefficients", "unbounded-arguments"]
        assert all(r.verified for r in results)

    def test_oscillation_direction(self):
        """Test that the same pair fails when the equation must dominate."""
        results = HypothesisCheck.evaluate_comparison(
            [parse("1")], [parse("2")], [parse("t - 1")], (0.0, 50.0), comparison_dominates=False
        )
        assert results[0].status == HypothesisStatus.VIOLATED

    def test_to_dict(self):
        """Test the serializable result."""
        result = HypothesisCheck.check_nonnegative(parse("1"), (0.0, 1.0), "nonnegative-forcing")
        payload = result.to_dict()
        assert payload["status"] == "verified"
        assert set(payload) == {"id", "status", "worst_point", "margin", "message", "caveat"}
