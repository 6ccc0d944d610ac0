"""Tests for panel quadrature over piecewise coefficients."""
import math

import numpy as np
import pytest

from app.core.expressions import parse
from app.core.quadrature import antiderivative, cumulative_quad, panel_edges, quad


class TestQuad:
    """Test the panelled adaptive quadrature."""

    def test_smooth_integrand(self):
        """Test int_0^pi sin = 2."""
        assert quad(parse("sin(t)"), 0.0, math.pi) == pytest.approx(2.0, abs=1e-10)

    def test_jumps_are_panel_edges(self):
        """Test that a jump inside the interval does not spoil the result."""
        fn = parse("ind(t, 1, 2)")
        assert list(panel_edges(fn, 0.0, 3.0)) == pytest.approx([0.0, 1.0, 2.0, 3.0])
        assert quad(fn, 0.0, 3.0) == pytest.approx(1.0, abs=1e-10)

    def test_periodic_piecewise(self):
        """Test one period of the forced-delay-oscillation coefficient."""
        fn = parse("piecewise period 3*pi [0, 1): 0 ; [1, 3*pi): 3")
        expected = 3.0 * (3 * math.pi - 1.0) * 2
        assert quad(fn, 0.0, 6 * math.pi) == pytest.approx(expected, abs=1e-8)

    def test_plain_callable(self):
        """Test that a scalar callable without breakpoints is accepted."""
        assert quad(lambda x: x * x, 0.0, 3.0) == pytest.approx(9.0)

    def test_empty_and_reversed_interval(self):
        """Test a == b and a > b."""
        assert quad(parse("t"), 2.0, 2.0) == 0.0
        with pytest.raises(ValueError):
            quad(parse("t"), 2.0, 1.0)


class TestCumulative:
    """Test cumulative integrals and antiderivatives."""

    def test_cumulative_polynomial(self):
        """Test that Gauss-Legendre is exact for low degree polynomials."""
        grid = np.linspace(0.0, 1.0, 11)
        values = cumulative_quad(parse("t"), grid)
        np.testing.assert_allclose(values, grid ** 2 / 2, atol=1e-14)

    def test_cumulative_short_grid(self):
        """Test that a single point gives a single zero."""
        assert list(cumulative_quad(parse("t"), np.array([1.0]))) == [0.0]

    def test_antiderivative(self):
        """Test that the primitive of cos anchored at 0 is sin."""
        prim = antiderivative(parse("cos(t)"), 0.0, 5.0)
        ts = np.linspace(0.0, 5.0, 37)
        np.testing.assert_allclose(prim(ts), np.sin(ts), atol=1e-6)


class TestAdditivity:
    """Test int_a^c = int_a^b + int_b^c."""

    @pytest.mark.parametrize("src", [
        "sin(t)^2 + t",
        "ind(t, 1, 2) * exp(-t)",
        "piecewise period 3*pi [0, 1): 0 ; [1, 3*pi): 3",
    ])
    @pytest.mark.parametrize("split", [0.5, 1.0, 2.7, 5.0])
    def test_adjacent_intervals(self, src, split):
        """Test that splitting [0, 6] at any point keeps the total."""
        fn = parse(src)
        whole = quad(fn, 0.0, 6.0)
        assert quad(fn, 0.0, split) + quad(fn, split, 6.0) == pytest.approx(whole, abs=1e-9)
