"""Red-blue (bichromatic) matching, spanning tree and tour on an HST."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .hst import HstParams, NodeId, leaf_distance
from .mono import mst_cost
from .sampling import ColoredSample, SubtreeCounts


class Color(enum.Enum):
    WHITE = "white"
    RED = "red"
    BLUE = "blue"
    VIOLET = "violet"


@dataclass(frozen=True)
class BoundedCost:
    lower: Fraction
    upper: Fraction

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"lower bound {self.lower} exceeds upper bound {self.upper}")

    def __contains__(self, value) -> bool:
        return self.lower <= value <= self.upper


@dataclass(frozen=True)
class NearestOpposite:
    """Nearest opposite-coloured point of one sample point.

    ``violet_level`` is the level of the lowest ancestor holding both colours;
    ``neighbor`` the leftmost leaf of the opposite colour under it.
    """

    color: Color
    leaf: int
    neighbor: int
    violet_level: int
    distance: Fraction


def _counts(s: ColoredSample) -> tuple[SubtreeCounts, SubtreeCounts]:
    return (SubtreeCounts.from_points(s.params, s.red.points),
            SubtreeCounts.from_points(s.params, s.blue.points))


def _check_sizes(s: ColoredSample) -> None:
    if len(s.red) != len(s.blue):
        raise ValueError(f"colour classes differ in size: {len(s.red)} red, {len(s.blue)} blue")


def _check_both(s: ColoredSample) -> None:
    if len(s.red) == 0 or len(s.blue) == 0:
        raise ValueError("both colour classes must be nonempty")


class NodeColoring:
    """Violet/red/blue/white colouring of the occupied part of the tree."""

    def __init__(self, s: ColoredSample):
        self.params = s.params
        self._red, self._blue = _counts(s)

    def __getitem__(self, v: NodeId) -> Color:
        r, b = self._red[v], self._blue[v]
        if r and b:
            return Color.VIOLET
        if r:
            return Color.RED
        if b:
            return Color.BLUE
        return Color.WHITE

    def items(self) -> Iterator[tuple[NodeId, Color]]:
        for level in range(self.params.delta + 1):
            keys = set(self._red.by_level[level]) | set(self._blue.by_level[level])
            for idx in sorted(keys):
                v = NodeId(level, idx)
                yield v, self[v]


def node_discrepancy(s: ColoredSample, v: NodeId) -> int:
    red, blue = _counts(s)
    return abs(red[v] - blue[v])


def _discrepancy_by_level(s: ColoredSample) -> list[list[tuple[int, int]]]:
    # per level: (|R(v) - B(v)|, R(v) + B(v)) for every occupied vertex
    red, blue = _counts(s)
    out = []
    for level in range(s.params.delta + 1):
        r, b = red.by_level[level], blue.by_level[level]
        out.append([(abs(r.get(i, 0) - b.get(i, 0)), r.get(i, 0) + b.get(i, 0))
                    for i in set(r) | set(b)])
    return out


def bi_matching_cost(s: ColoredSample) -> Fraction:
    """Optimal red-blue matching cost: each edge carries the colour imbalance below it."""
    _check_sizes(s)
    w = s.params.edge_weights
    total = Fraction(0)
    for level, rows in enumerate(_discrepancy_by_level(s)):
        if level:
            total += w[level] * sum(d for d, _ in rows)
    return total


def _min_leaf(params: HstParams, points) -> list[dict[int, int]]:
    b = params.b
    levels: list[dict[int, int]] = [dict() for _ in range(params.delta + 1)]
    for p in points:
        cur = levels[params.delta].get(p)
        if cur is None:
            levels[params.delta][p] = p
    for level in range(params.delta - 1, -1, -1):
        up: dict[int, int] = {}
        for idx, m in levels[level + 1].items():
            q = idx // b
            if q not in up or m < up[q]:
                up[q] = m
        levels[level] = up
    return levels


def nearest_opposite(s: ColoredSample) -> list[NearestOpposite]:
    """Nearest opposite-colour neighbour of every point, reds first.

    Ties go to the leftmost leaf.
    """
    _check_both(s)
    params = s.params
    b, delta = params.b, params.delta
    mins = {Color.RED: _min_leaf(params, s.red.points), Color.BLUE: _min_leaf(params, s.blue.points)}
    out = []
    for color, pts, other in ((Color.RED, s.red.points, Color.BLUE), (Color.BLUE, s.blue.points, Color.RED)):
        opp = mins[other]
        cache: dict[int, NearestOpposite] = {}
        for p in pts:
            hit = cache.get(p)
            if hit is None:
                idx, level = p, delta
                while idx not in opp[level]:
                    idx //= b
                    level -= 1
                hit = NearestOpposite(color, p, opp[level][idx], level, params.cross_weights[level])
                cache[p] = hit
            out.append(hit)
    return out


def nearest_opposite_cost(s: ColoredSample) -> Fraction:
    return sum((x.distance for x in nearest_opposite(s)), Fraction(0))


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, x: int, y: int) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        self.parent[ry] = rx
        return True


# component census of a subtree: (red singletons, blue singletons, violet components)
_Census = tuple[int, int, int]


def _merge_census(children: list[_Census]) -> tuple[_Census, int]:
    """Run one round of bichromatic Kruskal at a vertex.

    All red-blue pairs split across two different children have the same
    length, so the round can be resolved on component types alone: red
    singletons of child i join every blue-capable component (blue singleton
    or violet) outside i, and symmetrically.  Returns the new census and the
    number of edges added.
    """
    groups = []  # (child, kind, count); kind 0 red, 1 blue, 2 violet
    for i, (r, bl, v) in enumerate(children):
        for kind, cnt in ((0, r), (1, bl), (2, v)):
            if cnt:
                groups.append((i, kind, cnt))
    before = sum(g[2] for g in groups)

    def reds_ok(kind):
        return kind in (0, 2)

    def blues_ok(kind):
        return kind in (1, 2)

    uf = _UnionFind(len(groups))
    active = [False] * len(groups)
    for a, (ia, ka, _) in enumerate(groups):
        for c, (ic, kc, _) in enumerate(groups):
            if ia == ic:
                continue
            if (reds_ok(ka) and blues_ok(kc)) or (blues_ok(ka) and reds_ok(kc)):
                active[a] = active[c] = True
                uf.union(a, c)
    singles_r = sum(g[2] for g, on in zip(groups, active) if not on and g[1] == 0)
    singles_b = sum(g[2] for g, on in zip(groups, active) if not on and g[1] == 1)
    lone_v = sum(g[2] for g, on in zip(groups, active) if not on and g[1] == 2)
    merged = len({uf.find(a) for a, on in enumerate(active) if on})
    census = (singles_r, singles_b, lone_v + merged)
    return census, before - sum(census)


def bi_mst_cost_exact(s: ColoredSample) -> Fraction:
    """Exact minimum bichromatic spanning tree cost.

    Kruskal's algorithm on red-blue edges, processed in groups of equal
    length: pairs whose lowest common ancestor is on level l all have length
    ``cross_weights[l]``, and deeper levels come first.
    """
    _check_both(s)
    params = s.params
    b = params.b
    red, blue = _counts(s)
    census: dict[int, _Census] = {}
    edges_by_level = [0] * (params.delta + 1)
    leaf_level = params.delta
    for idx in set(red.by_level[leaf_level]) | set(blue.by_level[leaf_level]):
        r, bl = red.by_level[leaf_level].get(idx, 0), blue.by_level[leaf_level].get(idx, 0)
        if r and bl:
            census[idx] = (0, 0, 1)
            edges_by_level[leaf_level] += r + bl - 1
        else:
            census[idx] = (r, bl, 0)
    for level in range(params.delta - 1, -1, -1):
        kids: dict[int, list[_Census]] = {}
        for idx, c in census.items():
            kids.setdefault(idx // b, []).append(c)
        census = {}
        for idx, cs in kids.items():
            census[idx], added = _merge_census(cs) if len(cs) > 1 else (cs[0], 0)
            edges_by_level[level] += added
    assert sum(edges_by_level) == len(s.red) + len(s.blue) - 1
    cw = params.cross_weights
    return sum((cw[l] * e for l, e in enumerate(edges_by_level)), Fraction(0))


def bi_mst_theta_bounds(s: ColoredSample) -> BoundedCost:
    """Bracket from the violet-ancestor construction.

    upper: monochromatic MST on R u B plus every point's nearest-opposite edge;
    lower: the larger of the monochromatic MST and half the nearest-opposite sum.
    """
    _check_both(s)
    mono = mst_cost(s.union()).total
    near = nearest_opposite_cost(s)
    return BoundedCost(max(mono, near / 2), mono + near)


# chains are alternating paths: (point ids, first colour, last colour, child tag)
_RED, _BLUE = 0, 1


def _join_chains(chains: list[tuple[list[int], int, int, int]]) -> list[tuple[list[int], int, int]]:
    """Greedily concatenate alternating paths into as few as possible.

    Paths whose ends have opposite colours (mixed) can be reversed.  A
    junction is legal when the colours at it differ; among legal candidates
    a path from a different child is preferred.
    """
    pools: dict[str, list] = {"RR": [], "BB": [], "M": []}
    for pts, first, last, tag in chains:
        key = "RR" if first == last == _RED else "BB" if first == last == _BLUE else "M"
        if key == "M" and first == _BLUE:
            pts = pts[::-1]
        pools[key].append((pts, tag))
    out = []
    while any(pools.values()):
        if pools["RR"] and len(pools["RR"]) >= len(pools["BB"]):
            pts, tag = pools["RR"].pop()
            seq, first, last = list(pts), _RED, _RED
        elif pools["BB"]:
            pts, tag = pools["BB"].pop()
            seq, first, last = list(pts), _BLUE, _BLUE
        else:
            pts, tag = pools["M"].pop()
            seq, first, last = list(pts), _RED, _BLUE
        while True:
            options = ["BB", "M"] if last == _RED else ["RR", "M"]
            pick = None
            for key in ("M", options[0]):
                for j in range(len(pools[key]) - 1, -1, -1):
                    if pools[key][j][1] != tag:
                        pick = (key, j)
                        break
                if pick:
                    break
            if pick is None:
                for key in options:
                    if pools[key]:
                        pick = (key, len(pools[key]) - 1)
                        break
            if pick is None:
                break
            key, j = pick
            pts, tag = pools[key].pop(j)
            if key == "M":
                # stored red-first; run it blue-first after a red end
                seq.extend(pts[::-1] if last == _RED else pts)
            else:
                seq.extend(pts)
                last = _BLUE if key == "BB" else _RED
        out.append((seq, first, last))
    return out


def _constructed_tour(s: ColoredSample) -> list[int]:
    """Alternating Hamiltonian cycle built bottom-up through the tree."""
    params = s.params
    b = params.b
    n = len(s.red)
    leaf_of = list(s.red.points) + list(s.blue.points)
    at_leaf: dict[int, tuple[list[int], list[int]]] = {}
    for i, p in enumerate(s.red.points):
        at_leaf.setdefault(p, ([], []))[0].append(i)
    for i, p in enumerate(s.blue.points):
        at_leaf.setdefault(p, ([], []))[1].append(n + i)
    chains: dict[int, list[tuple[list[int], int, int]]] = {}
    for leaf, (reds, blues) in at_leaf.items():
        items = []
        major, minor, mcol = (reds, blues, _RED) if len(reds) >= len(blues) else (blues, reds, _BLUE)
        k = len(minor)
        if k:
            seq = [x for pair in zip(major, minor) for x in pair]
            if len(major) > k:
                seq.append(major[k])
                items.append((seq, mcol, mcol))
                rest = major[k + 1:]
            else:
                items.append((seq, mcol, 1 - mcol))
                rest = []
        else:
            rest = major
        items.extend(([x], mcol, mcol) for x in rest)
        chains[leaf] = items
    for _level in range(params.delta - 1, -1, -1):
        grouped: dict[int, list] = {}
        for idx, items in chains.items():
            grouped.setdefault(idx // b, []).extend((pts, f, l, idx) for pts, f, l in items)
        chains = {idx: _join_chains(items) for idx, items in grouped.items()}
    (final,) = chains.values()
    assert len(final) == 1, "colour totals differ; no alternating cycle"
    tour = final[0][0]
    assert len(tour) == 2 * n
    return [leaf_of[i] for i in tour]


def _cycle_cost(params: HstParams, leaves: list[int]) -> Fraction:
    if len(leaves) < 2:
        return Fraction(0)
    return sum((leaf_distance(params, leaves[i - 1], leaves[i]) for i in range(len(leaves))), Fraction(0))


def bi_tsp_lower(s: ColoredSample) -> Fraction:
    """Every alternating tour enters a subtree at least |R(v) - B(v)| times, and
    at least once if the subtree holds some but not all of the points."""
    _check_sizes(s)
    total_pts = 2 * len(s.red)
    w = s.params.edge_weights
    total = Fraction(0)
    for level, rows in enumerate(_discrepancy_by_level(s)):
        if level == 0:
            continue
        visits = sum(max(d, 1 if x < total_pts else 0) for d, x in rows)
        total += 2 * visits * w[level]
    return total


def bi_tsp_bounds(s: ColoredSample) -> BoundedCost:
    """Lower bound from subtree discrepancies; upper bound from an explicit tour.

    The upper bound is the exact length of an alternating tour assembled
    bottom-up: paths inside each leaf, then at every vertex the children's
    paths are chained red-to-blue with the surplus colour left as separate
    paths for the parent.
    """
    _check_sizes(s)
    if len(s.red) == 0:
        return BoundedCost(Fraction(0), Fraction(0))
    return BoundedCost(bi_tsp_lower(s), _cycle_cost(s.params, _constructed_tour(s)))


def bi_tsp_tour(s: ColoredSample) -> list[int]:
    """Leaf sequence of the constructed alternating tour (red, blue, red, ...)."""
    _check_sizes(s)
    return _constructed_tour(s) if len(s.red) else []


def bi_tsp_visit_estimate(s: ColoredSample) -> Fraction:
    """Visit-count estimate: |R(v) - B(v)| + 1 visits to an unbalanced subtree,
    one to a balanced nonempty one, none to a subtree holding every point."""
    _check_sizes(s)
    total_pts = 2 * len(s.red)
    w = s.params.edge_weights
    total = Fraction(0)
    for level, rows in enumerate(_discrepancy_by_level(s)):
        if level == 0:
            continue
        visits = sum((d + 1 if d else 1) for d, x in rows if x < total_pts)
        total += 2 * visits * w[level]
    return total
