from collections import Counter
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st
from scipy.stats import chi2

from conftest import multisets, small_params
from hstopt.hst import ROOT, HstParams, NodeId
from hstopt.sampling import (LeafMultiset, SplitMix64, SubtreeCounts, parity_of_counts, sample_colored,
                             sample_leaves, subtree_counts, uniform_indices)


def test_splitmix64_reference_vectors():
    # published outputs of the reference generator
    rng = SplitMix64(0)
    assert [rng.next_u64() for _ in range(3)] == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]
    rng = SplitMix64(1234567)
    assert rng.next_u64() == 6457827717110365317
    assert rng.next_u64() == 3203168211198807973


@pytest.mark.parametrize("m", [2, 3, 7, 1000, 3 ** 20, 2 ** 63 + 5, 2 ** 64])
def test_batch_and_scalar_draws_agree(m):
    rng = SplitMix64(99, 4)
    assert uniform_indices(m, 300, 99, 4) == [rng.below(m) for _ in range(300)]


def test_draws_beyond_64_bits():
    m = 10 ** 40
    draws = uniform_indices(m, 200, 5, 1)
    assert all(0 <= x < m for x in draws)
    assert max(draws) > 2 ** 64
    assert draws == uniform_indices(m, 200, 5, 1)


def test_streams_differ():
    p = HstParams(2, 20, F(1, 2))
    assert sample_leaves(p, 20, 1, 0).points != sample_leaves(p, 20, 1, 1).points


def test_empty_and_deterministic():
    p = HstParams(3, 4, F(1, 2))
    assert sample_leaves(p, 0, 1).points == ()
    assert sample_leaves(p, 50, 11, 3) == sample_leaves(p, 50, 11, 3)


def test_colored_sample_splits_one_stream():
    p = HstParams(3, 4, F(1, 2))
    s = sample_colored(p, 10, 8, 2)
    assert s.red.points + s.blue.points == tuple(uniform_indices(p.n_leaves, 20, 8, 2))


def test_seed_range():
    with pytest.raises(ValueError):
        SplitMix64(-1)
    with pytest.raises(ValueError):
        SplitMix64(2 ** 64)


def test_leaf_frequencies_chi_square():
    p = HstParams(2, 10, F(1, 2))
    counts = Counter(sample_leaves(p, 10 ** 5, 2024).points)
    expected = 10 ** 5 / 1024
    stat = sum((counts.get(i, 0) - expected) ** 2 / expected for i in range(1024))
    assert stat < chi2.ppf(0.999, 1023)


def test_subtree_count_examples():
    c = subtree_counts(LeafMultiset(HstParams(2, 1, F(1, 2)), (0, 0)))
    assert c[ROOT] == 2 and c[NodeId(1, 0)] == 2 and c[NodeId(1, 1)] == 0
    empty = subtree_counts(LeafMultiset(HstParams(2, 3, F(1, 2)), ()))
    assert empty[ROOT] == 0 and list(empty.nodes()) == []
    c = subtree_counts(LeafMultiset(HstParams(2, 2, F(1, 2)), (0, 1, 3)))
    assert (c[NodeId(1, 0)], c[NodeId(1, 1)]) == (2, 1)
    assert [c[NodeId(2, i)] for i in range(4)] == [1, 1, 0, 1]
    assert NodeId(2, 2) not in c


def test_parity_examples():
    p = HstParams(2, 2, F(1, 2))
    c = subtree_counts(LeafMultiset(p, (0, 0, 1, 2, 2)))
    assert parity_of_counts(c, NodeId(1, 0)) == 1
    assert parity_of_counts(c, NodeId(2, 3)) == 0
    assert parity_of_counts(c, NodeId(1, 1)) == 0


def test_out_of_range_leaf():
    with pytest.raises(ValueError):
        LeafMultiset(HstParams(2, 2, F(1, 2)), (4,))


@given(multisets(max_size=30))
def test_parent_sum_law(w):
    c = subtree_counts(w)
    b = w.params.b
    assert c.total == len(w)
    for level in range(w.params.delta):
        for idx, cnt in c.by_level[level].items():
            kids = sum(c[NodeId(level + 1, idx * b + j)] for j in range(b))
            assert kids == cnt


@given(small_params(), st.integers(0, 2 ** 64 - 1), st.integers(0, 1000), st.integers(0, 40))
def test_sample_contract(p, seed, stream, n):
    w = sample_leaves(p, n, seed, stream)
    assert len(w) == n and all(0 <= x < p.n_leaves for x in w)
    assert SubtreeCounts.from_points(p, w.points).total == n
