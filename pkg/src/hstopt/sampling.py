"""Reproducible uniform leaf samples and their per-vertex occupancy counts.

Randomness comes from splitmix64 (Steele, Lea and Flood 2014).  The stream
for ``(seed, stream)`` starts from state ``seed ^ (stream * GOLDEN) mod 2**64``
and the i-th output is ``mix(state + (i + 1) * GOLDEN)``, so outputs can be
computed one at a time or as a numpy batch and agree bit for bit.

Bounded draws in ``[0, m)`` take ``ceil(bits / 64)`` consecutive words
(first word most significant), keep the top ``bits = (m - 1).bit_length()``
bits and reject values ``>= m``.  This is exact for any ``m``, including leaf
counts far beyond 2**64.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .hst import HstParams, NodeId

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def stream_state(seed: int, stream: int) -> int:
    if not 0 <= seed <= MASK64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if stream < 0:
        raise ValueError(f"stream index must be >= 0, got {stream}")
    return (seed ^ ((stream * GOLDEN) & MASK64)) & MASK64


class SplitMix64:
    """Scalar splitmix64 generator; the reference for the batched path."""

    def __init__(self, seed: int, stream: int = 0):
        self.state = stream_state(seed, stream)

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return _mix(self.state)

    def below(self, m: int) -> int:
        if m < 1:
            raise ValueError("upper bound must be >= 1")
        if m == 1:
            return 0
        bits = (m - 1).bit_length()
        words = -(-bits // 64)
        shift = 64 * words - bits
        while True:
            x = 0
            for _ in range(words):
                x = (x << 64) | self.next_u64()
            x >>= shift
            if x < m:
                return x


def _mix_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    return z ^ (z >> np.uint64(31))


def _batch_below(state: int, m: int, n: int) -> list[int]:
    # same draws as SplitMix64.below, vectorised for m <= 2**64
    bits = (m - 1).bit_length()
    shift = np.uint64(64 - bits)
    out: list[int] = []
    offset = 0
    chunk = max(16, n + n // 4 + 8)
    with np.errstate(over="ignore"):
        while len(out) < n:
            steps = np.arange(offset + 1, offset + chunk + 1, dtype=np.uint64)
            words = _mix_array(np.uint64(state) + steps * np.uint64(GOLDEN))
            vals = words >> shift
            accepted = vals[vals < np.uint64(m)] if m < (1 << 64) else vals
            out.extend(int(x) for x in accepted[: n - len(out)])
            offset += chunk
    return out


def uniform_indices(m: int, n: int, seed: int, stream: int = 0) -> list[int]:
    """``n`` i.i.d. uniform integers in ``[0, m)`` for ``(seed, stream)``."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if n == 0:
        return []
    if m == 1:
        return [0] * n
    if m <= (1 << 64):
        return _batch_below(stream_state(seed, stream), m, n)
    rng = SplitMix64(seed, stream)
    return [rng.below(m) for _ in range(n)]


@dataclass(frozen=True)
class LeafMultiset:
    params: HstParams
    points: tuple[int, ...]

    def __post_init__(self):
        m = self.params.n_leaves
        pts = tuple(int(p) for p in self.points)
        for p in pts:
            if not 0 <= p < m:
                raise ValueError(f"leaf index {p} outside [0, {m})")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[int]:
        return iter(self.points)


@dataclass(frozen=True)
class ColoredSample:
    red: LeafMultiset
    blue: LeafMultiset

    def __post_init__(self):
        if self.red.params != self.blue.params:
            raise ValueError("red and blue samples live on different trees")

    @property
    def params(self) -> HstParams:
        return self.red.params

    @property
    def n(self) -> int:
        return len(self.red)

    def union(self) -> LeafMultiset:
        return LeafMultiset(self.params, self.red.points + self.blue.points)

    @classmethod
    def from_points(cls, params: HstParams, red: Sequence[int], blue: Sequence[int]) -> "ColoredSample":
        return cls(LeafMultiset(params, tuple(red)), LeafMultiset(params, tuple(blue)))


def sample_leaves(params: HstParams, n: int, seed: int, stream: int = 0) -> LeafMultiset:
    return LeafMultiset(params, tuple(uniform_indices(params.n_leaves, n, seed, stream)))


def sample_colored(params: HstParams, n: int, seed: int, stream: int = 0) -> ColoredSample:
    """Red points are the first ``n`` draws of the stream, blue the next ``n``."""
    pts = uniform_indices(params.n_leaves, 2 * n, seed, stream)
    return ColoredSample.from_points(params, pts[:n], pts[n:])


class SubtreeCounts:
    """Sparse occupancy ``X(v)``: number of sample points below each vertex.

    ``by_level[l]`` maps vertex index to count and only holds vertices with a
    nonzero count.  Lookups of absent vertices return 0.
    """

    def __init__(self, params: HstParams, by_level: list[dict[int, int]]):
        self.params = params
        self.by_level = by_level

    @classmethod
    def from_points(cls, params: HstParams, points: Sequence[int]) -> "SubtreeCounts":
        b = params.b
        levels: list[dict[int, int]] = [dict() for _ in range(params.delta + 1)]
        levels[params.delta] = dict(Counter(points))
        for level in range(params.delta - 1, -1, -1):
            up: dict[int, int] = {}
            for idx, c in levels[level + 1].items():
                p = idx // b
                up[p] = up.get(p, 0) + c
            levels[level] = up
        return cls(params, levels)

    def __getitem__(self, v: NodeId) -> int:
        return self.by_level[v.level].get(v.index, 0)

    def __contains__(self, v: NodeId) -> bool:
        return v.index in self.by_level[v.level]

    def nodes(self) -> Iterator[tuple[NodeId, int]]:
        for level, d in enumerate(self.by_level):
            for idx, c in d.items():
                yield NodeId(level, idx), c

    @property
    def total(self) -> int:
        return self.by_level[0].get(0, 0)

    def occupied(self, level: int) -> int:
        return len(self.by_level[level])


def subtree_counts(w: LeafMultiset) -> SubtreeCounts:
    return SubtreeCounts.from_points(w.params, w.points)


def parity_of_counts(c: SubtreeCounts, v: NodeId) -> int:
    return c[v] & 1
