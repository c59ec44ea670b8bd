import itertools
import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import small_params
from hstopt.closed_form import (BoundEnvelope, azuma_tail, bi_matching_scaling, bi_tour_scaling,
                                check_analytic_inequalities, concentration_tail, discrepancy_moment_bounds,
                                expected_matching_cost, expected_tour_with_root, expected_violet_path,
                                geometric_level_sum, iso_tail, matching_envelope, order_stat_prob, parity_prob,
                                tail_exponent, violet_level_distribution)
from hstopt.hst import HstParams
from hstopt.mono import induced_tour_cost, matching_cost
from hstopt.sampling import LeafMultiset


def test_geometric_level_sum():
    assert geometric_level_sum(HstParams(2, 5, F(1, 2)), 3) == 3
    assert geometric_level_sum(HstParams(2, 5, F(1, 2)), 0) == 0
    assert geometric_level_sum(HstParams(3, 5, F(2, 3)), 2) == 6
    with pytest.raises(ValueError):
        geometric_level_sum(HstParams(3, 2, F(2, 3)), 3)


def test_parity_prob_examples():
    assert parity_prob(F(1, 2), 7) == F(1, 2)
    assert parity_prob(F(1, 4), 2) == F(3, 8)
    assert parity_prob(F(1, 4), 0) == 0
    with pytest.raises(ValueError):
        parity_prob(F(0), 3)


def test_parity_prob_by_enumeration():
    # two draws from four cells: count outcomes with an odd number in cell 0
    odd = sum((a == 0) + (b == 0) == 1 for a, b in itertools.product(range(4), repeat=2))
    assert F(odd, 16) == parity_prob(F(1, 4), 2)


@given(st.integers(1, 12), st.integers(0, 60))
def test_parity_prob_monotone_and_bounded(k, n):
    r = F(1, 2 ** k)
    assert parity_prob(r, n) <= parity_prob(r, n + 1) <= F(1, 2)


def test_order_stat_examples():
    assert order_stat_prob(4, 1, 1, 4) == 1
    assert order_stat_prob(4, 2, 2, 4) == F(9, 16)
    assert order_stat_prob(2, 1, 1, 1) == F(1, 2)
    brute = sum(min(a, b) >= 2 for a, b in itertools.product(range(1, 5), repeat=2))
    assert F(brute, 16) == order_stat_prob(4, 2, 2, 4)
    with pytest.raises(ValueError):
        order_stat_prob(4, 2, 3, 2)


@given(st.integers(2, 5), st.integers(1, 5), st.integers(1, 40))
def test_order_stat_ranges_tile(b, delta, n):
    m = b ** delta
    total = order_stat_prob(m, n, 1, 1) + sum(order_stat_prob(m, n, b ** (l - 1) + 1, b ** l)
                                              for l in range(1, delta + 1))
    assert total == 1
    assert sum(violet_level_distribution(HstParams(b, delta, F(1, 2)), n)) == 1


def test_expected_tour_examples():
    p = HstParams(2, 1, F(1, 2))
    assert expected_tour_with_root(p, 2) == F(3, 2)
    assert abs(float(expected_tour_with_root(p, 200)) - 2) < 1e-12
    assert expected_tour_with_root(HstParams(2, 2, F(1, 2)), 1) == F(3, 2)


def _enumerate(p, n, fn):
    total = F(0)
    for pts in itertools.product(range(p.n_leaves), repeat=n):
        total += fn(LeafMultiset(p, pts))
    return total / p.n_leaves ** n


@pytest.mark.parametrize("p,max_n", [(HstParams(2, 2, F(1, 2)), 5), (HstParams(3, 2, F(2, 5)), 4),
                                     (HstParams(4, 2, F(3, 4), F(2)), 3), (HstParams(2, 4, F(1, 3)), 3)])
def test_expectations_match_enumeration(p, max_n):
    for n in range(1, max_n + 1):
        assert expected_tour_with_root(p, n) == _enumerate(p, n, lambda w: induced_tour_cost(w, True).total)
        assert expected_matching_cost(p, n) == _enumerate(p, n, lambda w: matching_cost(w).total)


@given(small_params(max_b=5, max_delta=6), st.integers(1, 5000))
def test_matching_envelope_holds_exactly(p, n):
    env = matching_envelope(p, n)
    assert expected_matching_cost(p, n) in env


def test_matching_envelope_monotone_in_depth():
    uppers = [matching_envelope(HstParams(3, d, F(3, 5)), 3 ** 6).upper for d in range(1, 7)]
    lowers = [matching_envelope(HstParams(3, d, F(3, 5)), 3 ** 6).lower for d in range(1, 7)]
    assert uppers == sorted(uppers) and lowers == sorted(lowers)


def test_envelope_ordering():
    with pytest.raises(ValueError):
        BoundEnvelope(2, 1)


def test_expected_violet_path_examples():
    lam = F(2, 7)
    assert expected_violet_path(HstParams(2, 1, lam), 1) == F(1, 2) * 2 * lam
    far = float(expected_violet_path(HstParams(2, 2, F(1, 2)), 400))
    assert far < 4 * (3 / 4) ** 400


def test_azuma_examples():
    assert azuma_tail(0, 10, 1.5) == 2
    assert azuma_tail(1.5 * math.sqrt(2 * 10 * math.log(2)), 10, 1.5) == pytest.approx(1, abs=1e-12)
    assert azuma_tail(3, 10, 1) < azuma_tail(2, 10, 1)


def test_iso_examples():
    assert iso_tail(0, 5) == 4
    assert iso_tail(3, 10) > iso_tail(3, 5)
    assert iso_tail(math.sqrt(8 * 7 * math.log(4)), 7) == pytest.approx(1, abs=1e-12)


def test_concentration_examples():
    p = HstParams(4, 3, F(1, 2))
    assert concentration_tail(p, 0, 10, 1.0) == 8
    assert tail_exponent(p) == pytest.approx(4)
    for d in (2, 3, 5):
        assert tail_exponent(HstParams(2 ** d, 2, F(1, 2))) == pytest.approx(2 * d / (d - 1))
    flat = HstParams(2, 3, F(1, 2))
    assert concentration_tail(flat, 2, 10, 1.0) < concentration_tail(flat, 1, 10, 1.0)
    with pytest.raises(ValueError):
        concentration_tail(HstParams(2, 3, F(1, 3)), 1, 10, 1.0)


def test_discrepancy_bounds_examples():
    env = discrepancy_moment_bounds(2, F(1, 2))
    assert env.upper == pytest.approx(1)
    with pytest.raises(ValueError):
        discrepancy_moment_bounds(3, F(1, 4))


@given(st.integers(1, 8), st.integers(0, 2000))
def test_discrepancy_bounds_ordered(k, extra):
    p = F(1, 2 ** k)
    n = 2 ** k + extra
    env = discrepancy_moment_bounds(n, p)
    assert 0 < env.lower <= env.upper


def test_discrepancy_bounds_contain_simulation():
    rng = np.random.default_rng(17)
    n, p, trials = 100, 0.25, 10 ** 4
    x = np.abs(rng.binomial(n, p, trials) - rng.binomial(n, p, trials))
    mean, se = x.mean(), x.std(ddof=1) / math.sqrt(trials)
    env = discrepancy_moment_bounds(n, F(1, 4))
    assert env.lower - 4 * se <= mean <= env.upper + 4 * se


def test_scaling_examples():
    p = HstParams(4, 6, F(1, 2))
    assert bi_tour_scaling(p, 64) == pytest.approx(8 * 3)
    assert bi_tour_scaling(p, 1) == 0
    q = HstParams(4, 6, F(7, 10))
    assert bi_tour_scaling(q, 64) == pytest.approx(8 * (1.4 + 1.96 + 2.744))
    assert bi_matching_scaling(p, 64) == pytest.approx(16 * 3)
    assert bi_matching_scaling(p, 1) == 0
    assert bi_matching_scaling(q, 64) == pytest.approx(16 * (1.4 + 1.96 + 2.744))


def test_inequality_sweep_passes():
    report = check_analytic_inequalities(seed=11, points=10 ** 4)
    assert report.passed, report.summary()
    assert all(r.checked >= 10 ** 4 for r in report.results)
    assert check_analytic_inequalities(seed=11, points=500).summary() == \
        check_analytic_inequalities(seed=11, points=500).summary()


def test_inequality_examples():
    assert math.exp(0.5) < (1 + 1 / 2) ** 2 < math.e
    assert 1 * (1 - 1 / 1) ** 1 < 1
