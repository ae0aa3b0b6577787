from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings, strategies as st

settings.register_profile(
    "repo", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")


@st.composite
def rational_simplex_points(draw, d: int, denominator: int = 12):
    """Points of the simplex with coordinates k / denominator."""
    cuts = sorted(draw(st.lists(st.integers(0, denominator), min_size=d - 1, max_size=d - 1)))
    edges = [0] + cuts + [denominator]
    return tuple(Fraction(edges[i + 1] - edges[i], denominator) for i in range(d))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[key])


@pytest.fixture
def rng():
    from simplex_kernels.dist import RngStream
    return RngStream(12345)
