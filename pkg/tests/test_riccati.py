"""Tests for the Riccati transform and its integration."""
import math

import numpy as np
import pytest

from app.config import settings
from app.core.equation import EquationSpec, HistorySpec
from app.core.errors import IntegrationError, TransformUndefinedError
from app.core.expressions import constant
from app.core.integrator import StepMarcher, solve_cauchy
from app.core.riccati import (
    RiccatiProblem,
    _escaping,
    initial_value,
    riccati_from_solution,
    solution_from_riccati,
    solve_riccati,
)


@pytest.fixture
def hyperbolic_equation():
    """phi'' - phi = 0; with y(0) = 0 the Riccati solution is tanh."""
    return EquationSpec.build(terms=[("-1", "t")])


class TestSolveRiccati:
    """Test y' = -y^2/p - sum r exp(-(F - F(alpha))) on closed forms."""

    def test_blow_up_of_harmonic(self, harmonic_equation):
        """Test y = -tan(t) escapes to -inf near pi/2."""
        traj = solve_riccati(RiccatiProblem(harmonic_equation, 1.0, 0.0, homogeneous=True), 3.0)
        assert not traj.clean
        assert traj.blow_up.direction == "-inf"
        assert traj.blow_up.escape_time == pytest.approx(math.pi / 2, abs=1e-4)
        assert traj.reached < math.pi / 2
        assert traj.y(1.0) == pytest.approx(-math.tan(1.0), rel=1e-6)

    def test_clean_tanh(self, hyperbolic_equation):
        """Test y = tanh(t) and F = ln cosh(t)."""
        traj = solve_riccati(RiccatiProblem(hyperbolic_equation, 1.0, 0.0, homogeneous=True), 2.0)
        assert traj.clean
        assert traj.reached == pytest.approx(2.0)
        ts = np.linspace(0.0, 2.0, 9)
        np.testing.assert_allclose(traj.y(ts), np.tanh(ts), atol=1e-7)
        np.testing.assert_allclose(traj.F(ts), np.log(np.cosh(ts)), atol=1e-7)

    def test_left_extension_is_gamma(self, hyperbolic_equation):
        """Test that y equals gamma left of t1."""
        traj = solve_riccati(
            RiccatiProblem(hyperbolic_equation, 1.0, 0.0, gamma=constant(0.5), homogeneous=True), 1.0
        )
        assert traj.y(-1.0) == pytest.approx(0.5)
        assert traj.F(-1.0) == pytest.approx(-0.5)

    def test_forced_term(self):
        """Test y' = f/lam exp(-F) with no coefficients: phi'' = 1 gives y = t/(1 + t^2/2)."""
        eq = EquationSpec.build(f="1")
        traj = solve_riccati(RiccatiProblem(eq, 1.0, 0.0), 2.0)
        assert traj.y(2.0) == pytest.approx(2.0 / 3.0, rel=1e-6)

    def test_zero_lam_rejected(self, harmonic_equation):
        """Test that lam = 0 is rejected."""
        with pytest.raises(ValueError):
            RiccatiProblem(harmonic_equation, 0.0, 0.0)

    def test_horizon_equal_t1(self, harmonic_equation):
        """Test the degenerate span."""
        traj = solve_riccati(RiccatiProblem(harmonic_equation, 1.0, 0.0, gamma=constant(2.0)), 0.0)
        assert traj.reached == 0.0
        assert traj.y(0.0) == pytest.approx(2.0)


class TestTransform:
    """Test the transforms between solutions and Riccati solutions."""

    def test_from_solution(self, harmonic_equation):
        """Test y = p phi'/phi = -tan(t) for phi = cos(t)."""
        phi = solve_cauchy(harmonic_equation, HistorySpec.build(t1=0.0, theta="1"), 1.2)
        riccati = riccati_from_solution(phi)
        assert riccati.lam == pytest.approx(1.0)
        assert riccati.y(1.0) == pytest.approx(-math.tan(1.0), rel=1e-6)
        assert riccati.F(1.0) == pytest.approx(math.log(math.cos(1.0)), rel=1e-6)

    def test_from_solution_with_zero(self, harmonic_equation):
        """Test that a vanishing phi makes the transform undefined."""
        phi = solve_cauchy(harmonic_equation, HistorySpec.build(t1=0.0, theta="1"), 2.0)
        with pytest.raises(TransformUndefinedError):
            riccati_from_solution(phi)

    def test_back_to_solution(self, hyperbolic_equation):
        """Test phi = lam exp(F) = 2 cosh(t)."""
        riccati = solve_riccati(RiccatiProblem(hyperbolic_equation, 2.0, 0.0, homogeneous=True), 2.0)
        traj = solution_from_riccati(riccati)
        assert traj.phi(1.5) == pytest.approx(2 * math.cosh(1.5), rel=1e-6)
        assert traj.psi(1.5) == pytest.approx(2 * math.sinh(1.5), rel=1e-6)
        assert traj.zeros == ()

    def test_initial_value(self):
        """Test y(t1) = p phi'/phi and the undefined case."""
        assert initial_value(constant(2.0), 2.0, 3.0, 0.0) == pytest.approx(3.0)
        with pytest.raises(TransformUndefinedError):
            initial_value(constant(1.0), 0.0, 1.0, 0.0)


class TestAugmentedState:
    """Test the accumulator F carried next to y."""

    @pytest.fixture
    def delayed_riccati(self):
        """(2 phi')' - phi(t - 1/2) = 0 with phi = 1 on the past, so y(0) = 0 and lam = 1."""
        eq = EquationSpec.build(p="2", terms=[("-1", "t - 0.5")])
        riccati = solve_riccati(RiccatiProblem(eq, 1.0, 0.0, homogeneous=True), 5.0)
        phi = solve_cauchy(eq, HistorySpec.build(t1=0.0, theta="1", zeta=0.0), 5.0)
        return riccati, phi

    def test_accumulator_derivative(self, delayed_riccati):
        """Test F' = y/p by central differences."""
        riccati, _ = delayed_riccati
        assert riccati.clean
        h = 1e-3
        ts = np.linspace(0.5, 4.5, 9)
        slopes = (riccati.F(ts + h) - riccati.F(ts - h)) / (2 * h)
        np.testing.assert_allclose(slopes, riccati.y(ts) / 2.0, atol=1e-5)

    def test_matches_solution(self, delayed_riccati):
        """Test y = p phi'/phi and F = ln phi against the integrated solution."""
        riccati, phi = delayed_riccati
        ts = np.linspace(0.0, 5.0, 51)
        np.testing.assert_allclose(riccati.y(ts), phi.psi(ts) / phi.phi(ts), atol=1e-6)
        np.testing.assert_allclose(riccati.F(ts), np.log(phi.phi(ts)), atol=1e-6)

    def test_delayed_exponent(self, delayed_riccati):
        """Test exp(-(F(t) - F(t - 1/2))) = phi(t - 1/2)/phi(t), across t1 as well."""
        riccati, phi = delayed_riccati
        ts = np.linspace(0.0, 5.0, 51)
        ratio = np.exp(-(riccati.F(ts) - riccati.F(ts - 0.5)))
        np.testing.assert_allclose(ratio, phi.phi(ts - 0.5) / phi.phi(ts), rtol=1e-6)


class TestBlowUpOnFailure:
    """Test how an integrator failure is read: blow-up or numeric error."""

    @pytest.fixture
    def failing_marcher(self, monkeypatch):
        """Make the second macro-step fail with the given last state and step."""
        def install(y: float, step: float):
            class FailingMarcher(StepMarcher):
                def _advance(self, lo, hi):
                    if hi > 1.0:
                        self.failed_state = np.array([y, 0.0])
                        self.failed_step = step
                        raise IntegrationError("required step size is less than spacing between numbers", t=lo)
                    return super()._advance(lo, hi)

            monkeypatch.setattr("app.core.riccati.StepMarcher", FailingMarcher)
        return install

    def test_step_collapse_is_blow_up(self, harmonic_equation, failing_marcher):
        """Test that a last step below RICCATI_MIN_STEP reports a blow-up at the failure point."""
        failing_marcher(-50.0, settings.RICCATI_MIN_STEP / 10)
        traj = solve_riccati(RiccatiProblem(harmonic_equation, 1.0, 0.0, homogeneous=True), 1.5)
        assert not traj.clean
        assert traj.blow_up.direction == "-inf"
        assert traj.blow_up.time == pytest.approx(0.75)
        assert traj.blow_up.escape_time == pytest.approx(0.75 + 1.0 / 50.0)
        assert traj.reached == pytest.approx(0.75)

    def test_large_y_is_blow_up(self, harmonic_equation, failing_marcher):
        """Test that |y| above RICCATI_FALLBACK_Y is a blow-up whatever the step."""
        failing_marcher(2 * settings.RICCATI_FALLBACK_Y, 1e-3)
        traj = solve_riccati(RiccatiProblem(harmonic_equation, 1.0, 0.0, homogeneous=True), 1.5)
        assert traj.blow_up.direction == "+inf"

    def test_other_failures_propagate(self, harmonic_equation, failing_marcher):
        """Test that a moderate y with a normal step stays a numeric failure."""
        failing_marcher(-50.0, 1e-3)
        with pytest.raises(IntegrationError):
            solve_riccati(RiccatiProblem(harmonic_equation, 1.0, 0.0, homogeneous=True), 1.5)

    def test_escaping_rule(self):
        assert _escaping(-2 * settings.RICCATI_FALLBACK_Y, None)
        assert _escaping(5.0, settings.RICCATI_MIN_STEP / 2)
        assert not _escaping(5.0, 1e-3)
        assert not _escaping(5.0, None)


class TestRandomInstances:
    """Property checks on seeded random instances."""

    def test_round_trip(self, rng):
        """Test phi -> y -> phi on 50 zero-free phi'' - k phi(t - h) = 0 with theta = 1, phi'(0) >= 0."""
        ts = np.linspace(0.0, 10.0, 101)
        for _ in range(50):
            k, h, zeta = (float(x) for x in rng.uniform([0.2, 0.25, 0.0], [1.0, 1.0, 1.0]))
            eq = EquationSpec.build(terms=[(f"{-k!r}", f"t - {h!r}")])
            traj = solve_cauchy(eq, HistorySpec.build(t1=0.0, theta="1", zeta=zeta), 10.0)
            assert traj.zeros == ()
            back = solution_from_riccati(riccati_from_solution(traj))
            np.testing.assert_allclose(back.phi(ts), traj.phi(ts), rtol=1e-6)
            np.testing.assert_allclose(back.psi(ts), traj.psi(ts), rtol=1e-6, atol=1e-9)

    def test_blow_up_at_first_zero(self, rng):
        """Test on 20 random (p phi')' + r phi = 0 that y escapes where phi first vanishes."""
        for _ in range(20):
            p, k, w = (float(x) for x in rng.uniform([0.5, 1.0, 0.5], [2.0, 4.0, 2.0]))
            a = float(rng.uniform(0.0, 0.5)) * k
            zeta = float(rng.uniform(-1.0, 1.0))
            eq = EquationSpec.build(p=f"{p!r}", terms=[(f"{k!r} + {a!r}*cos({w!r}*t)", "t")])
            traj = solve_cauchy(eq, HistorySpec.build(t1=0.0, theta="1", zeta=zeta), 10.0)
            assert traj.zeros
            y0 = initial_value(eq.p, 1.0, zeta, 0.0)
            riccati = solve_riccati(RiccatiProblem(eq, 1.0, 0.0, gamma=constant(y0), homogeneous=True), 10.0)
            assert riccati.blow_up is not None
            assert riccati.blow_up.direction == "-inf"
            assert riccati.blow_up.escape_time == pytest.approx(traj.zeros[0].location, abs=1e-4)
