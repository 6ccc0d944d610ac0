"""Tests for conjugate points of ordinary equations on an interval."""
import math

import pytest

from app.core.expressions import constant, parse
from app.core.sturm import interval_oscillatory, solve_ode_interval


class TestConjugatePairs:
    """Test phi'' + k^2 phi = 0, whose conjugate points are pi/k apart."""

    @pytest.mark.parametrize("k", [0.5, 1.0, 2.0, 4.0])
    def test_long_interval_is_oscillatory(self, k):
        """Test that an interval 5% longer than pi/k holds a conjugate pair."""
        length = 1.05 * math.pi / k
        found, pair = interval_oscillatory(constant(1.0), constant(k * k), (0.0, length))
        assert found
        tau1, tau2 = pair
        assert 0.0 <= tau1 < tau2 <= length
        assert tau2 - tau1 == pytest.approx(math.pi / k, rel=1e-6)

    @pytest.mark.parametrize("k", [0.5, 1.0, 2.0, 4.0])
    def test_short_interval_is_not(self, k):
        """Test that an interval 5% shorter than pi/k holds none."""
        length = 0.95 * math.pi / k
        found, pair = interval_oscillatory(constant(1.0), constant(k * k), (0.0, length), scan_points=16)
        assert not found
        assert pair is None

    def test_variable_p(self):
        """Test (p phi')' + r phi = 0 with p = 4, r = 1: conjugate points 2 pi apart."""
        found, pair = interval_oscillatory(constant(4.0), constant(1.0), (1.0, 1.0 + 2.1 * math.pi))
        assert found
        assert pair[1] - pair[0] == pytest.approx(2 * math.pi, rel=1e-6)

    def test_empty_interval(self):
        """Test that a degenerate interval is rejected."""
        with pytest.raises(ValueError):
            interval_oscillatory(constant(1.0), constant(1.0), (1.0, 1.0))


class TestSolveOdeInterval:
    """Test the interval solver."""

    def test_initial_conditions(self):
        """Test phi(a) and phi'(a) for phi'' + phi = 0 started at a = 1."""
        traj = solve_ode_interval(constant(1.0), parse("1"), (1.0, 3.0), (0.0, 1.0))
        assert traj.phi(1.0) == pytest.approx(0.0)
        assert traj.phi(1.0 + math.pi / 2) == pytest.approx(1.0, abs=1e-7)
        assert traj.reached == pytest.approx(3.0)
