import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from conftest import colored, multisets, small_params
from hstopt.bichromatic import bi_matching_cost, bi_mst_cost_exact
from hstopt.hst import ROOT, HstParams, NodeId, diameter, top_k_weight
from hstopt.mono import (SolutionCost, induced_tour_cost, matching_cost, mst_cost, occupied_lca_level,
                         transit_counts)
from hstopt.oracles import DistanceMatrix, brute_matching, brute_mst, brute_tsp
from hstopt.sampling import LeafMultiset, subtree_counts


def ms(p, *pts):
    return LeafMultiset(p, pts)


def test_transit_examples():
    star3 = HstParams(3, 1, F(1, 2))
    assert transit_counts(subtree_counts(ms(star3, 0, 0, 1, 2))).transits == {ROOT: 1}
    star2 = HstParams(2, 1, F(1, 2))
    assert transit_counts(subtree_counts(ms(star2, 0, 1))).transits == {ROOT: 1}
    prof = transit_counts(subtree_counts(ms(HstParams(2, 2, F(1, 2)), 0, 1, 3)))
    assert prof.transits == {NodeId(1, 0): 1}
    assert prof.leftover == 1


def test_matching_examples(binary2):
    assert matching_cost(ms(binary2, 0, 1)).total == F(1, 2)
    assert matching_cost(ms(binary2, 0, 0)).total == 0
    assert matching_cost(ms(binary2, 0, 1, 2, 3)).total == 1
    assert matching_cost(ms(binary2)).total == 0


def test_tour_examples(binary2):
    assert induced_tour_cost(ms(binary2, 0, 1)).total == 1
    assert induced_tour_cost(ms(binary2, 0, 3)).total == 3
    assert induced_tour_cost(ms(binary2, 0)).total == 0
    assert induced_tour_cost(ms(binary2, 0), include_root=True).total == F(3, 2)
    with pytest.raises(ValueError):
        induced_tour_cost(ms(binary2))


def test_mst_examples(binary2):
    assert mst_cost(ms(binary2, 0, 1, 3)).total == 2
    assert mst_cost(ms(binary2, 0, 1)).total == F(1, 2)
    assert mst_cost(ms(binary2, 0, 0, 0)).total == 0
    with pytest.raises(ValueError):
        mst_cost(ms(binary2))


def test_per_level_breakdown(binary2):
    c = induced_tour_cost(ms(binary2, 0, 3))
    assert c.per_level == (0, 2 * F(1, 2) * 2, 2 * F(1, 4) * 2)
    with pytest.raises(ValueError):
        SolutionCost(F(1), (F(1, 2),))


def test_occupied_lca_level(binary2):
    assert occupied_lca_level(subtree_counts(ms(binary2, 2, 3))) == 1
    assert occupied_lca_level(subtree_counts(ms(binary2, 2, 2))) == 2
    assert occupied_lca_level(subtree_counts(ms(binary2, 0, 3))) == 0


@given(multisets(max_size=10))
def test_matching_equals_oracle(w):
    assert matching_cost(w).total == brute_matching(DistanceMatrix.from_sample(w))


@given(multisets(min_size=1, max_size=9))
def test_tour_and_mst_equal_oracles(w):
    m = DistanceMatrix.from_sample(w)
    assert induced_tour_cost(w).total == brute_tsp(m)
    assert mst_cost(w).total == brute_mst(m)


@given(multisets(min_size=1, max_size=40))
def test_tour_minus_mst_within_diameter(w):
    gap = induced_tour_cost(w).total - mst_cost(w).total
    if len(set(w.points)) >= 2:
        assert 0 < gap <= diameter(w.params)
    else:
        assert gap == 0


@given(multisets(max_size=60))
def test_transit_bounds(w):
    c = subtree_counts(w)
    b = w.params.b
    prof = transit_counts(c)
    for v, tau in prof.transits.items():
        odd = sum(c[NodeId(v.level + 1, v.index * b + j)] & 1 for j in range(b))
        assert 0 < tau <= odd // 2 <= b // 2
    # transits plus pairs formed inside a leaf account for every matched pair
    local = sum(cnt // 2 for cnt in c.by_level[w.params.delta].values())
    assert prof.total() + local == len(w) // 2
    assert prof.leftover == len(w) % 2


@given(multisets(min_size=1, max_size=40))
def test_root_tour_dominates_rootless(w):
    assert induced_tour_cost(w, include_root=True).total >= induced_tour_cost(w).total


@given(small_params(max_b=4, max_delta=4), st.integers(2, 30), st.integers(0, 2 ** 32), st.data())
def test_smoothness(p, n, seed, data):
    # a single moved point (k = 1) is excluded: Top(1) = 0 there, see the ledger
    rng = random.Random(seed)
    x = [rng.randrange(p.n_leaves) for _ in range(n)]
    k = data.draw(st.integers(2, n))
    y = list(x)
    for i in rng.sample(range(n), k):
        y[i] = rng.randrange(p.n_leaves)
    a, b = LeafMultiset(p, tuple(x)), LeafMultiset(p, tuple(y))
    top = top_k_weight(p, k)
    assert abs(matching_cost(a).total - matching_cost(b).total) <= 2 * top / (1 - p.lam)
    assert abs(induced_tour_cost(a).total - induced_tour_cost(b).total) <= 8 * top / (1 - p.lam)


def test_single_moved_point_breaks_top_one_bound(binary2):
    a, b = ms(binary2, 0, 0), ms(binary2, 0, 3)
    assert top_k_weight(binary2, 1) == 0
    assert matching_cost(b).total - matching_cost(a).total == diameter(binary2)


@given(colored(max_n=6))
def test_monochromatic_below_bichromatic(s):
    u = s.union()
    assert matching_cost(u).total <= bi_matching_cost(s)
    assert mst_cost(u).total <= bi_mst_cost_exact(s)
