"""Tests for interval oscillation of equations with deviating arguments."""
import math

import numpy as np
import pytest

from app.core.equation import DelayTerm
from app.core.expressions import parse
from app.core.hypotheses import HypothesisStatus
from app.core.interval_oscillation import (
    IntervalOscInstance,
    build_comparison,
    check_interval_comparison,
    eps_schedule,
    partition_family,
    second_interval_coefficient,
)
from app.core.verdicts import VerdictTag

PERIODIC = "piecewise period 3*pi [0, 1): 0 ; [1, 3*pi): {amplitude}"


def _instance(partition, amplitude=3):
    return IntervalOscInstance.build("1", [(PERIODIC.format(amplitude=amplitude), "t - 0.5")], partition)


class TestInstance:
    """Test index sets and bounds derived from a partition."""

    def test_delayed_term_sets(self, oscillation_partition):
        """Test that t - 1/2 falls in omega1- on the first interval and omega2- on the second."""
        inst = _instance(oscillation_partition)
        assert inst.omega_plus == ()
        assert inst.omega1_minus == (0,)
        assert inst.omega2_minus == (0,)
        assert inst.t3_minus == pytest.approx(2 * math.pi + 0.5, abs=1e-9)
        assert inst.t2_plus == -math.inf

    def test_hull(self, oscillation_partition):
        """Test that the conclusion interval is [0, 3 pi]."""
        lo, hi = _instance(oscillation_partition).hull
        assert lo == pytest.approx(0.0, abs=1e-9)
        assert hi == pytest.approx(3 * math.pi)

    def test_advanced_term(self):
        """Test that t + 1/2 is in omega+ and out of omega2-."""
        inst = IntervalOscInstance.build("1", [("1", "t + 0.5")], (0.0, 2.0, 3.0, 5.0))
        assert inst.omega_plus == (0,)
        assert inst.omega2_minus == ()
        assert inst.t2_plus == pytest.approx(2.5)
        payload = inst.to_dict()
        assert payload["omega_plus"] == [1]
        assert payload["partition"] == [0.0, 2.0, 3.0, 5.0]

    def test_accepts_delay_terms(self):
        """Test that DelayTerm objects are accepted as they are."""
        term = DelayTerm.of("1", "t")
        inst = IntervalOscInstance.build("1", [term], (0.0, 1.0, 1.0, 2.0))
        assert inst.terms == (term,)

    def test_unordered_partition(self):
        """Test that t1 < t2 <= t3 < t4 is required."""
        with pytest.raises(ValueError):
            _instance((1.0, 0.5, 2.0, 3.0))
        with pytest.raises(ValueError):
            _instance((0.0, 2.0, 1.0, 3.0))


class TestHelpers:
    """Test partition families, eps schedules and comparison coefficients."""

    def test_partition_family(self):
        """Test shifted copies of the base partition."""
        family = partition_family((0.5, 1.0, 1.5, 2.0), 3.0, 3)
        assert family[0] == (0.5, 1.0, 1.5, 2.0)
        assert family[2] == (6.5, 7.0, 7.5, 8.0)

    def test_eps_schedule(self):
        """Test the geometric eps sample."""
        assert eps_schedule(1.0, 4) == [1.0, 0.5, 0.25, 0.125]

    @pytest.mark.parametrize("eps0, count", [(1.0, 9), (0.3, 5), (2.0, 1)])
    def test_eps_schedule_decreasing(self, eps0, count):
        """Test that the schedule starts at eps0 and strictly decreases towards 0."""
        schedule = eps_schedule(eps0, count)
        assert len(schedule) == count
        assert schedule[0] == eps0
        assert all(later < earlier for earlier, later in zip(schedule, schedule[1:]))
        assert all(eps > 0 for eps in schedule)

    def test_default_eps_schedule(self):
        """Test the default {1, ..., 2^-8}."""
        schedule = eps_schedule()
        assert schedule[0] == 1.0
        assert schedule[-1] == 2.0 ** -8

    def test_effective_coefficient(self, oscillation_partition):
        """Test r (P(t - 1/2) + eps) / (P(t) + eps) with P(x) = x - 1/2."""
        inst = _instance(oscillation_partition)
        _, r_eff = build_comparison(inst, 0.5)
        ts = np.array([2.0, 4.0, 6.0])
        expected = 3.0 * (ts - 1.0 + 0.5) / (ts - 0.5 + 0.5)
        np.testing.assert_allclose(r_eff(ts), expected, rtol=1e-6)

    def test_effective_coefficient_invalid(self, oscillation_partition):
        """Test that eps must be positive."""
        with pytest.raises(ValueError):
            build_comparison(_instance(oscillation_partition), 0.0)

    def test_second_interval_coefficient(self, oscillation_partition):
        """Test the sum over omega2-."""
        r = second_interval_coefficient(_instance(oscillation_partition))
        assert r(7.0) == pytest.approx(3.0)


class TestCheck:
    """Test the interval comparison verdicts."""

    def test_certified(self, oscillation_partition):
        """Test that amplitude 3 oscillates on [0, 3 pi]."""
        report = check_interval_comparison(_instance(oscillation_partition))
        assert report.criterion == "interval-comparison"
        assert report.verdict.tag == VerdictTag.CERTIFIED_OSCILLATORY
        lo, hi = report.verdict.interval
        assert lo == pytest.approx(0.0, abs=1e-9)
        assert hi == pytest.approx(3 * math.pi)
        assert len(report.witnesses["first_interval_pairs"]) == 9
        assert report.witnesses["second_interval_pair"] is not None
        assert any("eps" in caveat for caveat in report.caveats)

    def test_second_interval_too_short(self, oscillation_partition):
        """Test that amplitude 2 puts conjugate points pi/sqrt(2) apart, beyond pi - 1."""
        report = check_interval_comparison(_instance(oscillation_partition, amplitude=2))
        assert report.hypothesis("second-interval-conjugate").status == HypothesisStatus.VIOLATED
        assert report.verdict.tag == VerdictTag.INCONCLUSIVE

    def test_no_terms(self, oscillation_partition):
        """Test that empty index sets skip the conjugate point searches."""
        inst = IntervalOscInstance.build("1", [], oscillation_partition)
        report = check_interval_comparison(inst)
        assert report.hypothesis("index-sets").status == HypothesisStatus.VIOLATED
        assert report.hypothesis("first-interval-conjugate").status == HypothesisStatus.NOT_VERIFIABLE
        assert report.verdict.tag == VerdictTag.INCONCLUSIVE

    def test_negative_coefficient(self):
        """Test that a negative coefficient is reported."""
        inst = IntervalOscInstance.build("1", [("-1", "t - 0.5")], (1.0, 3.0, 4.0, 6.0))
        report = check_interval_comparison(inst)
        assert report.hypothesis("nonnegative-coefficients").status == HypothesisStatus.VIOLATED
        assert report.verdict.tag == VerdictTag.INCONCLUSIVE

    @pytest.mark.parametrize("index", range(10))
    def test_partition_family_certified(self, oscillation_partition, index):
        """Test that the shifted partition k oscillates inside [3 pi k, 3 pi (k + 1)]."""
        part = partition_family(oscillation_partition, 3 * math.pi, 10)[index]
        inst = _instance(part)
        report = check_interval_comparison(inst)
        assert report.verdict.tag == VerdictTag.CERTIFIED_OSCILLATORY
        assert inst.T1 >= 3 * math.pi * index - 1e-9
        assert inst.T2 <= 3 * math.pi * (index + 1) + 1e-9
        lo, hi = report.verdict.interval
        assert (lo, hi) == pytest.approx(inst.hull, abs=1e-9)
        assert lo >= 3 * math.pi * index - 1e-9
        assert hi <= 3 * math.pi * (index + 1) + 1e-9
