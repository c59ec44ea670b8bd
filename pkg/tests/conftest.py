from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from hstopt.hst import HstParams
from hstopt.sampling import ColoredSample, LeafMultiset

settings.register_profile(
    "default", deadline=None, max_examples=150, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

LAMBDAS = [Fraction(1, 3), Fraction(1, 2), Fraction(3, 4), Fraction(2, 5)]


@st.composite
def small_params(draw, max_b=4, max_delta=3):
    b = draw(st.integers(2, max_b))
    delta = draw(st.integers(1, max_delta))
    lam = draw(st.sampled_from(LAMBDAS))
    scale = draw(st.sampled_from([Fraction(1), Fraction(1, 2), Fraction(3)]))
    return HstParams(b, delta, lam, scale)


@st.composite
def multisets(draw, min_size=0, max_size=10, params=None):
    p = params if params is not None else draw(small_params())
    pts = draw(st.lists(st.integers(0, p.n_leaves - 1), min_size=min_size, max_size=max_size))
    return LeafMultiset(p, tuple(pts))


@st.composite
def colored(draw, min_n=1, max_n=5):
    p = draw(small_params())
    n = draw(st.integers(min_n, max_n))
    leaf = st.integers(0, p.n_leaves - 1)
    red = draw(st.lists(leaf, min_size=n, max_size=n))
    blue = draw(st.lists(leaf, min_size=n, max_size=n))
    return ColoredSample.from_points(p, red, blue)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(RESULTS):
        ok, detail = RESULTS[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def binary2():
    return HstParams(2, 2, Fraction(1, 2))
