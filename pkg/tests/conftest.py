from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from ppmc.gaussian import GaussianRational
from ppmc.reduced import ReducedPoly

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

small_fractions = st.fractions(min_value=-5, max_value=5, max_denominator=6)
gaussians = st.builds(GaussianRational, small_fractions, small_fractions)


@st.composite
def grids(draw, k=None, max_k=4, real=False):
    if k is None:
        k = draw(st.integers(0, max_k))
    vals = draw(st.lists(gaussians, min_size=(k + 1) ** 2, max_size=(k + 1) ** 2))
    p = ReducedPoly(k, [vals[a * (k + 1):(a + 1) * (k + 1)] for a in range(k + 1)])
    if real:
        p = (p + p.conjugate()).scale(Fraction(1, 2))
    return p


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for num in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[num])
