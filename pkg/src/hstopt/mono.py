"""Exact monochromatic matching, tour and spanning-tree costs on an HST.

Every solver works on the sparse occupancy counts of a sample and costs
O(n * delta) integer operations plus O(delta) rational multiplications.
Per-level breakdowns index edges by the level of their lower endpoint, so
``per_level[l]`` is the cost paid on edges of weight ``scale * lam**l``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .hst import HstParams, NodeId
from .sampling import LeafMultiset, SubtreeCounts, subtree_counts


@dataclass(frozen=True)
class SolutionCost:
    total: Fraction
    per_level: tuple[Fraction, ...]

    def __post_init__(self):
        if sum(self.per_level, Fraction(0)) != self.total:
            raise ValueError("per-level costs do not add up to the total")


@dataclass(frozen=True)
class TransitProfile:
    transits: dict[NodeId, int]
    leftover: int

    def per_level(self, delta: int) -> list[int]:
        out = [0] * (delta + 1)
        for v, t in self.transits.items():
            out[v.level] += t
        return out

    def total(self) -> int:
        return sum(self.transits.values())


def transit_counts(c: SubtreeCounts) -> TransitProfile:
    """Number of matched pairs whose lowest common ancestor is each vertex.

    At an internal vertex the transits are half of (number of children with
    an odd count, minus the parity of the vertex's own count).
    """
    params = c.params
    b = params.b
    transits: dict[NodeId, int] = {}
    for level in range(params.delta - 1, -1, -1):
        odd_children: dict[int, int] = {}
        for idx, cnt in c.by_level[level + 1].items():
            if cnt & 1:
                p = idx // b
                odd_children[p] = odd_children.get(p, 0) + 1
        own = c.by_level[level]
        for idx, k in odd_children.items():
            tau = (k - (own[idx] & 1)) // 2
            if tau:
                transits[NodeId(level, idx)] = tau
    return TransitProfile(transits, c.total & 1)


def _edge_usage_cost(params: HstParams, usage: list[int]) -> SolutionCost:
    w = params.edge_weights
    per_level = tuple(w[l] * u for l, u in enumerate(usage))
    return SolutionCost(sum(per_level, Fraction(0)), per_level)


def matching_cost(w: LeafMultiset) -> SolutionCost:
    """Minimum-weight (near-)perfect matching cost of the multiset."""
    params = w.params
    prof = transit_counts(subtree_counts(w))
    by_level = prof.per_level(params.delta)
    # a transit at level t crosses every edge level t+1..delta twice
    usage = [0] * (params.delta + 1)
    running = 0
    for level in range(1, params.delta + 1):
        running += by_level[level - 1]
        usage[level] = 2 * running
    return _edge_usage_cost(params, usage)


def occupied_lca_level(c: SubtreeCounts) -> int:
    """Deepest level holding a single occupied vertex (the points' LCA)."""
    t = 0
    for level in range(c.params.delta + 1):
        if c.occupied(level) == 1:
            t = level
        else:
            break
    return t


def induced_tour_cost(w: LeafMultiset, include_root: bool = False) -> SolutionCost:
    """Cost of the depth-first tour through the occupied leaves.

    Each edge of the subtree spanned by the points is walked twice.  With
    ``include_root`` the tour also visits the root; otherwise edges above the
    points' lowest common ancestor are left out, which gives the optimal tour.
    """
    if len(w) == 0:
        raise ValueError("a tour needs at least one point")
    params = w.params
    c = subtree_counts(w)
    start = 1 if include_root else occupied_lca_level(c) + 1
    usage = [0] * (params.delta + 1)
    for level in range(start, params.delta + 1):
        usage[level] = 2 * c.occupied(level)
    return _edge_usage_cost(params, usage)


def mst_cost(w: LeafMultiset) -> SolutionCost:
    """Minimum spanning tree cost: the optimal tour minus one top-level crossing."""
    if len(w) == 0:
        raise ValueError("a spanning tree needs at least one point")
    params = w.params
    c = subtree_counts(w)
    usage = [0] * (params.delta + 1)
    if c.occupied(params.delta) >= 2:
        t = occupied_lca_level(c)
        for level in range(t + 1, params.delta + 1):
            # tour walks each edge twice; the dropped edge crosses one path t -> leaf on each side
            usage[level] = 2 * c.occupied(level) - 2
    return _edge_usage_cost(params, usage)
