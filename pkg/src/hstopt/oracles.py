"""Brute-force ground truth for small instances.

Distances are scaled to integers by their common denominator before any
search, so the dynamic programs run on machine integers and the result is
converted back to an exact Fraction.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .hst import leaf_distance
from .sampling import ColoredSample, LeafMultiset

MATCHING_CAP = 16
TSP_CAP = 14
ENUMERATION_CAP = 8

RED, BLUE = 0, 1


class CapacityError(ValueError):
    """Instance too large for an exponential-time oracle."""


@dataclass(frozen=True)
class DistanceMatrix:
    """Exact symmetric distances between points, optionally coloured 0 (red) / 1 (blue)."""

    entries: tuple[tuple[Fraction, ...], ...]
    colors: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        n = len(self.entries)
        rows = tuple(tuple(Fraction(x) for x in row) for row in self.entries)
        for i, row in enumerate(rows):
            if len(row) != n:
                raise ValueError("distance matrix must be square")
            if row[i] != 0:
                raise ValueError(f"nonzero diagonal entry at {i}")
            for j in range(i):
                if row[j] != rows[j][i]:
                    raise ValueError(f"asymmetric entries at ({i}, {j})")
                if row[j] < 0:
                    raise ValueError("negative distance")
        object.__setattr__(self, "entries", rows)
        if self.colors is not None:
            cols = tuple(int(c) for c in self.colors)
            if len(cols) != n or any(c not in (RED, BLUE) for c in cols):
                raise ValueError("colors must give 0 (red) or 1 (blue) for every point")
            object.__setattr__(self, "colors", cols)

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def from_sample(cls, w: LeafMultiset) -> "DistanceMatrix":
        pts = w.points
        return cls(tuple(tuple(leaf_distance(w.params, p, q) for q in pts) for p in pts))

    @classmethod
    def from_colored(cls, s: ColoredSample) -> "DistanceMatrix":
        """Reds first, then blues."""
        pts = s.red.points + s.blue.points
        rows = tuple(tuple(leaf_distance(s.params, p, q) for q in pts) for p in pts)
        return cls(rows, (RED,) * len(s.red) + (BLUE,) * len(s.blue))

    def scaled(self) -> tuple[list[list[int]], int]:
        """Integer matrix ``D`` and denominator ``q`` with ``entries == D / q``."""
        q = 1
        for row in self.entries:
            for x in row:
                q = q * x.denominator // math.gcd(q, x.denominator)
        return [[int(x * q) for x in row] for row in self.entries], q

    def relabel(self, perm: Sequence[int]) -> "DistanceMatrix":
        rows = tuple(tuple(self.entries[i][j] for j in perm) for i in perm)
        cols = None if self.colors is None else tuple(self.colors[i] for i in perm)
        return DistanceMatrix(rows, cols)


def _require_colors(m: DistanceMatrix, balanced: bool) -> tuple[int, ...]:
    if m.colors is None:
        raise ValueError("bichromatic mode needs colour labels")
    reds = m.colors.count(RED)
    blues = len(m.colors) - reds
    if balanced and reds != blues:
        raise ValueError(f"colours are unbalanced: {reds} red, {blues} blue")
    if not balanced and (reds == 0 or blues == 0):
        raise ValueError("both colours must be present")
    return m.colors


def brute_matching(m: DistanceMatrix, bichromatic: bool = False) -> Fraction:
    """Minimum perfect matching by DP over subsets.

    For an odd point count one point is left out, chosen optimally.  With
    ``bichromatic`` only red-blue pairs are allowed (colours must balance).
    """
    n = len(m)
    if n > MATCHING_CAP:
        raise CapacityError(f"matching oracle handles at most {MATCHING_CAP} points, got {n}")
    colors = _require_colors(m, balanced=True) if bichromatic else None
    d, q = m.scaled()
    full = (1 << n) - 1
    inf = math.inf
    # best[mask][s]: cheapest way to settle the points in `mask`, s = skips still allowed
    skips = n & 1
    best = [[inf] * (skips + 1) for _ in range(1 << n)]
    best[0] = [0] * (skips + 1)
    for mask in range(1, full + 1):
        i = (mask & -mask).bit_length() - 1
        rest = mask ^ (1 << i)
        for s in range(skips + 1):
            cur = best[rest][s - 1] if s else inf
            r = rest
            while r:
                j = (r & -r).bit_length() - 1
                r ^= 1 << j
                if colors is not None and colors[i] == colors[j]:
                    continue
                cand = best[rest ^ (1 << j)][s] + d[i][j]
                if cand < cur:
                    cur = cand
            best[mask][s] = cur
    return Fraction(best[full][skips], q)


def brute_tsp(m: DistanceMatrix, alternating: bool = False) -> Fraction:
    """Held-Karp optimum tour; ``alternating`` forbids same-colour hops."""
    n = len(m)
    if n > TSP_CAP:
        raise CapacityError(f"tour oracle handles at most {TSP_CAP} points, got {n}")
    colors = _require_colors(m, balanced=True) if alternating else None
    if n <= 1:
        return Fraction(0)
    d, q = m.scaled()
    if n == 2:
        return Fraction(2 * d[0][1], q)
    big = max(max(row) for row in d) * (n + 1) + 1
    dtype = np.int64 if big < 2**61 else object
    dist = np.array(d, dtype=dtype)
    if colors is not None:
        same = np.equal.outer(colors, colors)
        dist = np.where(same, big, dist).astype(dtype)
    size = 1 << (n - 1)  # point n-1 is the fixed start, masks cover the rest
    dp = np.full((size, n - 1), big, dtype=dtype)
    start = n - 1
    for k in range(n - 1):
        dp[1 << k, k] = dist[start, k]
    sub = dist[: n - 1, : n - 1]
    for mask in range(1, size):
        row = dp[mask]
        if (row >= big).all():
            continue
        cand = (row[:, None] + sub).min(axis=0)
        for k in range(n - 1):
            if not mask >> k & 1:
                nxt = mask | (1 << k)
                if cand[k] < dp[nxt, k]:
                    dp[nxt, k] = cand[k]
    best = min(dp[size - 1, k] + dist[k, start] for k in range(n - 1))
    if best >= big:
        raise ValueError("no feasible tour")
    return Fraction(int(best), q)


class _DisjointSets:
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


def brute_mst(m: DistanceMatrix, bichromatic: bool = False) -> Fraction:
    """Kruskal on the complete graph (red-blue edges only when ``bichromatic``)."""
    n = len(m)
    if n < 1:
        raise ValueError("a spanning tree needs at least one point")
    colors = _require_colors(m, balanced=False) if bichromatic else None
    edges = sorted(
        (m.entries[i][j], i, j)
        for i in range(n) for j in range(i + 1, n)
        if colors is None or colors[i] != colors[j]
    )
    ds = _DisjointSets(n)
    total, used = Fraction(0), 0
    for w, i, j in edges:
        if ds.union(i, j):
            total += w
            used += 1
            if used == n - 1:
                break
    return total


# exhaustive enumerations, used to check the oracles above

def _check_enum(n: int) -> None:
    if n > ENUMERATION_CAP:
        raise CapacityError(f"enumeration handles at most {ENUMERATION_CAP} points, got {n}")


def enumerate_matching(m: DistanceMatrix, bichromatic: bool = False) -> Fraction:
    n = len(m)
    _check_enum(n)
    colors = _require_colors(m, balanced=True) if bichromatic else None
    e = m.entries
    best = None
    for perm in itertools.permutations(range(n)):
        pairs = [(perm[k], perm[k + 1]) for k in range(0, n - 1, 2)]
        if colors is not None and any(colors[i] == colors[j] for i, j in pairs):
            continue
        cost = sum((e[i][j] for i, j in pairs), Fraction(0))
        if best is None or cost < best:
            best = cost
    return best if best is not None else Fraction(0)


def enumerate_tsp(m: DistanceMatrix, alternating: bool = False) -> Fraction:
    n = len(m)
    _check_enum(n)
    colors = _require_colors(m, balanced=True) if alternating else None
    if n <= 1:
        return Fraction(0)
    e = m.entries
    best = None
    for rest in itertools.permutations(range(1, n)):
        cyc = (0,) + rest
        hops = [(cyc[k - 1], cyc[k]) for k in range(n)]
        if colors is not None and any(colors[i] == colors[j] for i, j in hops):
            continue
        cost = sum((e[i][j] for i, j in hops), Fraction(0))
        if best is None or cost < best:
            best = cost
    if best is None:
        raise ValueError("no feasible tour")
    return best


def _prufer_edges(seq: Sequence[int], n: int) -> list[tuple[int, int]]:
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    edges = []
    for x in seq:
        leaf = next(i for i in range(n) if degree[i] == 1)
        edges.append((leaf, x))
        degree[leaf] -= 1
        degree[x] -= 1
    u, v = (i for i in range(n) if degree[i] == 1)
    edges.append((u, v))
    return edges


def enumerate_mst(m: DistanceMatrix, bichromatic: bool = False) -> Fraction:
    """Minimum over every labelled spanning tree, listed by Pruefer sequence."""
    n = len(m)
    _check_enum(n)
    colors = _require_colors(m, balanced=False) if bichromatic else None
    if n == 1:
        return Fraction(0)
    if n == 2:
        return m.entries[0][1]
    e = m.entries
    best = None
    for seq in itertools.product(range(n), repeat=n - 2):
        edges = _prufer_edges(seq, n)
        if colors is not None and any(colors[i] == colors[j] for i, j in edges):
            continue
        cost = sum((e[i][j] for i, j in edges), Fraction(0))
        if best is None or cost < best:
            best = cost
    return best
