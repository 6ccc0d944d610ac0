"""Pytest configuration and shared fixtures."""
import math
import shutil
import tempfile

import numpy as np
import pytest

from app.core.equation import EquationSpec, HistorySpec
from app.data.scenario import load_preset


@pytest.fixture
def temp_data_dir():
    """Create a temporary output directory for tests."""
    temp_dir = tempfile.mkdtemp()
    yield temp_dir
    shutil.rmtree(temp_dir)


@pytest.fixture
def rng():
    """Seeded generator so randomized checks are reproducible."""
    return np.random.default_rng(12345)


@pytest.fixture
def harmonic_equation():
    """phi'' + phi = 0."""
    return EquationSpec.build(p="1", terms=[("1", "t")])


@pytest.fixture
def sine_history():
    """phi(0) = 0, phi'(0) = 1, so the solution of phi'' + phi = 0 is sin(t)."""
    return HistorySpec.build(t1=0.0, theta="0", zeta=1.0)


@pytest.fixture
def delayed_equation():
    """phi'' + phi(t - 1) = 0; with phi = 1 on [-1, 0] the method of steps has closed forms."""
    return EquationSpec.build(p="1", terms=[("1", "t - 1")])


@pytest.fixture
def constant_history():
    return HistorySpec.build(t1=0.0, theta="1", zeta=0.0)


@pytest.fixture
def delay_nonoscillation():
    """Forced equation with two delays whose comparison equation has phi = 1 as a solution."""
    return load_preset("delay-nonoscillation")


@pytest.fixture
def forced_delay_oscillation():
    """phi'' + c(t) phi(t - 1/2) = sin(t/3), c = 3 off [3 pi l, 3 pi l + 1]."""
    return load_preset("forced-delay-oscillation")


@pytest.fixture
def oscillation_partition():
    """First partition of the forced-delay-oscillation family."""
    return (0.5, 2 * math.pi + 0.5, 2 * math.pi + 1.0, 3 * math.pi)
