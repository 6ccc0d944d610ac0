"""Tests for verdict combination and criterion reports."""
import math

import pytest

from app.core.hypotheses import HypothesisResult, HypothesisStatus
from app.core.verdicts import CriterionReport, OscillationVerdict, VerdictTag, collect_caveats, conclude


def _result(hypothesis_id, status, caveat=None):
    return HypothesisResult(hypothesis_id, status, "", caveat=caveat)


VERIFIED = HypothesisStatus.VERIFIED
VIOLATED = HypothesisStatus.VIOLATED
NOT_VERIFIABLE = HypothesisStatus.NOT_VERIFIABLE


class TestConclude:
    """Test how hypothesis statuses combine into a verdict."""

    def test_all_verified_is_certified(self):
        """Test that every hypothesis verified gives the certified tag."""
        verdict = conclude([_result("a", VERIFIED), _result("b", VERIFIED)], VerdictTag.CERTIFIED_NONOSCILLATORY)
        assert verdict.tag == VerdictTag.CERTIFIED_NONOSCILLATORY
        assert verdict.horizon is None

    def test_violation_is_inconclusive(self):
        """Test that a violated hypothesis wins over numeric support."""
        verdict = conclude(
            [_result("a", VERIFIED), _result("b", VIOLATED), _result("c", NOT_VERIFIABLE)],
            VerdictTag.CERTIFIED_OSCILLATORY,
            numeric_horizon=100.0,
        )
        assert verdict.tag == VerdictTag.INCONCLUSIVE

    def test_not_verifiable_with_numeric_support(self):
        """Test that a finite numeric horizon gives the numeric tag."""
        verdict = conclude(
            [_result("a", VERIFIED), _result("b", NOT_VERIFIABLE)],
            VerdictTag.CERTIFIED_OSCILLATORY,
            numeric_horizon=30 * math.pi,
        )
        assert verdict.tag == VerdictTag.NUMERIC_OSCILLATORY
        assert verdict.horizon == pytest.approx(30 * math.pi)

    def test_not_verifiable_without_support(self):
        """Test that no numeric evidence gives Inconclusive."""
        verdict = conclude([_result("a", NOT_VERIFIABLE)], VerdictTag.CERTIFIED_NONOSCILLATORY)
        assert verdict.tag == VerdictTag.INCONCLUSIVE
        verdict = conclude(
            [_result("a", NOT_VERIFIABLE)], VerdictTag.CERTIFIED_NONOSCILLATORY, numeric_horizon=math.inf
        )
        assert verdict.tag == VerdictTag.INCONCLUSIVE

    def test_no_hypotheses(self):
        """Test that an empty hypothesis list certifies nothing."""
        assert conclude([], VerdictTag.CERTIFIED_OSCILLATORY).tag == VerdictTag.INCONCLUSIVE

    def test_interval_is_kept(self):
        """Test that an oscillation interval travels with the verdict."""
        verdict = conclude([_result("a", VERIFIED)], VerdictTag.CERTIFIED_OSCILLATORY, interval=(0.5, 3 * math.pi))
        assert verdict.interval == (0.5, 3 * math.pi)
        assert verdict.to_dict()["interval"] == [0.5, 3 * math.pi]


class TestVerdictTag:
    """Test tag helpers."""

    def test_numeric_counterparts(self):
        """Test the certified to numeric mapping."""
        assert VerdictTag.CERTIFIED_OSCILLATORY.numeric() == VerdictTag.NUMERIC_OSCILLATORY
        assert VerdictTag.CERTIFIED_NONOSCILLATORY.numeric() == VerdictTag.NUMERIC_NONOSCILLATORY
        assert VerdictTag.INCONCLUSIVE.numeric() == VerdictTag.INCONCLUSIVE

    def test_numeric_tag_needs_finite_horizon(self):
        """Test that numeric verdicts without a horizon are rejected."""
        with pytest.raises(ValueError):
            OscillationVerdict(VerdictTag.NUMERIC_NONOSCILLATORY)
        with pytest.raises(ValueError):
            OscillationVerdict(VerdictTag.NUMERIC_OSCILLATORY, horizon=math.inf)


class TestCriterionReport:
    """Test report invariants and serialization."""

    def test_certified_requires_verified_hypotheses(self):
        """Test that a certified report cannot carry an unverified hypothesis."""
        with pytest.raises(ValueError):
            CriterionReport(
                "comparison-nonosc",
                (_result("a", NOT_VERIFIABLE),),
                OscillationVerdict(VerdictTag.CERTIFIED_NONOSCILLATORY),
            )

    def test_hypothesis_lookup(self):
        """Test lookup by id."""
        report = CriterionReport(
            "forced-osc", (_result("dominance", VIOLATED),), OscillationVerdict(VerdictTag.INCONCLUSIVE)
        )
        assert report.hypothesis("dominance").status == VIOLATED
        with pytest.raises(KeyError):
            report.hypothesis("missing")

    def test_to_dict(self):
        """Test the serializable report."""
        report = CriterionReport(
            "forced-osc",
            (_result("dominance", VERIFIED),),
            OscillationVerdict(VerdictTag.CERTIFIED_OSCILLATORY, interval=(0.0, 1.0)),
            caveats=("finite window",),
        )
        payload = report.to_dict()
        assert payload["criterion"] == "forced-osc"
        assert payload["verdict"]["tag"] == "CertifiedOscillatory"
        assert payload["caveats"] == ["finite window"]
        assert payload["cross_check"] is None

    def test_collect_caveats(self):
        """Test that hypothesis caveats come first, prefixed by their id."""
        caveats = collect_caveats([_result("a", VERIFIED, caveat="window"), _result("b", VERIFIED)], ["extra"])
        assert caveats == ("a: window", "extra")
