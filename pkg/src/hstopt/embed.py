"""Dominating HSTs over regular grids in [0, 1]^d and the shifted torus family.

A grid with ``s`` cells per axis becomes a (2**d, log2 s, 1/2)-HST whose
leaves are the cell midpoints.  Leaf indices interleave coordinate bits:
the level-l digit of a leaf (base 2**d) holds bit ``delta - l`` of every
coordinate, coordinate j in bit j of the digit.

With ``scale = sqrt(d)/2`` two midpoints whose cells first separate at level
t are at tree distance ``sqrt(d) (2**-t - 1/s)``, which is at least the
Euclidean diameter of the pair's level-t cell span.  When ``sqrt(d)`` is
irrational a slightly larger rational scale keeps the tree dominating.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .hst import HstParams, leaf_distance, leaf_lca_level
from .sampling import uniform_indices

EXHAUSTIVE_PAIRS = 1 << 16
SCALE_BITS = 40


def _log2_exact(s: int) -> int:
    if s < 2 or s & (s - 1):
        raise ValueError(f"cells per axis must be a power of 2 and >= 2, got {s}")
    return s.bit_length() - 1


def dominating_scale(d: int) -> Fraction:
    """Smallest convenient rational >= sqrt(d)/2 (exact when d is a square)."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    root = math.isqrt(d)
    if root * root == d:
        return Fraction(root, 2)
    q = 1 << SCALE_BITS
    return Fraction(math.isqrt(d * q * q) + 1, 2 * q)


@dataclass(frozen=True)
class GridSpec:
    d: int
    s: int
    shift: Optional[int] = None

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        _log2_exact(self.s)
        if self.shift is not None:
            if self.d != 1:
                raise ValueError("shifted torus trees are only defined for d = 1")
            if not 0 <= self.shift < self.s:
                raise ValueError(f"shift must lie in [0, {self.s}), got {self.shift}")


@dataclass(frozen=True)
class GridHst:
    """An HST together with the grid positions of its leaves.

    Without a shift the leaves are the ``s**d`` cell midpoints of the
    unit cube.  For a shift ``j`` (d = 1 only) the leaves are the ``2 s``
    midpoints ``(2k + 1) / (2 s)`` of the torus [0, 2), and point ``k`` sits at
    leaf ``(k - j) mod 2 s``.
    """

    spec: GridSpec
    params: HstParams

    @property
    def torus(self) -> bool:
        return self.spec.shift is not None

    @property
    def n_points(self) -> int:
        return 2 * self.spec.s if self.torus else self.spec.s ** self.spec.d

    def cell_of_leaf(self, leaf: int) -> tuple[int, ...]:
        """Integer cell coordinates of a leaf (point number k on the torus)."""
        if self.torus:
            return ((leaf + self.spec.shift) % self.n_points,)
        d, delta = self.spec.d, self.params.delta
        coords = [0] * d
        for level in range(delta, 0, -1):
            digit = leaf % (1 << d)
            leaf >>= d
            for j in range(d):
                coords[j] |= ((digit >> j) & 1) << (delta - level)
        return tuple(coords)

    def leaf_of_cell(self, cell: Sequence[int]) -> int:
        if self.torus:
            (k,) = cell
            return (k - self.spec.shift) % self.n_points
        d, delta = self.spec.d, self.params.delta
        if len(cell) != d:
            raise ValueError(f"expected {d} coordinates, got {len(cell)}")
        leaf = 0
        for level in range(1, delta + 1):
            digit = 0
            for j, c in enumerate(cell):
                digit |= ((c >> (delta - level)) & 1) << j
            leaf = (leaf << d) | digit
        return leaf

    def point(self, leaf: int) -> tuple[Fraction, ...]:
        """Midpoint coordinates of a leaf's cell."""
        s = self.spec.s
        return tuple(Fraction(2 * c + 1, 2 * s) for c in self.cell_of_leaf(leaf))

    def metric_sq(self, i: int, j: int) -> Fraction:
        """Squared Euclidean (or torus) distance between two leaves' points."""
        a, b = self.cell_of_leaf(i), self.cell_of_leaf(j)
        s = self.spec.s
        if self.torus:
            gap = abs(a[0] - b[0])
            gap = min(gap, 2 * s - gap)
            return Fraction(gap * gap, s * s)
        return Fraction(sum((x - y) ** 2 for x, y in zip(a, b)), s * s)

    def tree_distance(self, i: int, j: int) -> Fraction:
        return leaf_distance(self.params, i, j)

    def snap(self, coords: Sequence[float]) -> int:
        """Leaf of the grid cell containing a point of [0, 1]^d."""
        if self.torus:
            raise ValueError("snapping is defined for the unshifted grid")
        s = self.spec.s
        cell = []
        for x in coords:
            x = Fraction(x)
            if not 0 <= x <= 1:
                raise ValueError(f"coordinate {x} outside [0, 1]")
            cell.append(min(int(x * s), s - 1))
        return self.leaf_of_cell(cell)


def build_grid_hst(spec: GridSpec) -> GridHst:
    delta = _log2_exact(spec.s)
    if spec.shift is not None:
        # 2s points spread over a torus of length 2
        return GridHst(spec, HstParams(2, delta + 1, Fraction(1, 2), Fraction(1)))
    return GridHst(spec, HstParams(2 ** spec.d, delta, Fraction(1, 2), dominating_scale(spec.d)))


@dataclass
class DominationVerdict:
    passed: bool
    pairs_checked: int
    exhaustive: bool
    violation: Optional[tuple[int, int, Fraction, Fraction]] = None  # leaves, tree distance, squared metric


def _pairs(m: int, seed: int, limit: int) -> tuple[Iterator[tuple[int, int]], bool]:
    if m * (m - 1) // 2 <= limit:
        return ((i, j) for i in range(m) for j in range(i + 1, m)), True
    draws = uniform_indices(m, 2 * limit, seed, stream=0)
    return zip(draws[::2], draws[1::2]), False


def check_domination(spec: GridSpec, seed: int = 0, limit: int = EXHAUSTIVE_PAIRS) -> DominationVerdict:
    """Compare tree and grid distances over every pair, or ``limit`` random pairs."""
    g = build_grid_hst(spec)
    pairs, exhaustive = _pairs(g.n_points, seed, limit)
    # tree distance depends only on the LCA level; cache its square
    sq = [c * c for c in g.params.cross_weights]
    checked = 0
    for i, j in pairs:
        checked += 1
        t = leaf_lca_level(i, j, g.params)
        euclid_sq = g.metric_sq(i, j)
        if sq[t] < euclid_sq:
            return DominationVerdict(False, checked, exhaustive, (i, j, g.params.cross_weights[t], euclid_sq))
    return DominationVerdict(True, checked, exhaustive)


@dataclass
class StretchRow:
    p: int
    q: int
    euclidean: Fraction
    expected_tree: Fraction
    stretch: Fraction


def shifted_family_stretch(spec: GridSpec) -> list[StretchRow]:
    """Exact expected stretch of every grid pair over all ``s`` torus shifts.

    Only the first ``s`` torus points (those in [0, 1)) are compared, and for
    them the torus distance is the Euclidean one.
    """
    if spec.d != 1:
        raise ValueError("the shifted family is implemented for d = 1 only")
    n = spec.s
    trees = [build_grid_hst(GridSpec(1, n, j)) for j in range(n)]
    rows = []
    for p in range(n):
        for q in range(p + 1, n):
            euclid = Fraction(q - p, n)
            total = sum((t.tree_distance(t.leaf_of_cell((p,)), t.leaf_of_cell((q,))) for t in trees),
                        Fraction(0))
            mean = total / n
            rows.append(StretchRow(p, q, euclid, mean, mean / euclid))
    return rows


def max_stretch(rows: Sequence[StretchRow]) -> Fraction:
    return max((r.stretch for r in rows), default=Fraction(1))
