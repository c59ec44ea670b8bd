"""Balanced hierarchically separated trees, represented implicitly.

A ``(b, delta, lam)``-HST has ``b**level`` vertices on each level, leaves on
level ``delta`` and the edge from a level-``l`` vertex to its parent weighing
``scale * lam**l``.  Vertices are addressed by ``NodeId(level, index)``; no
node objects are ever allocated, so ``b**delta`` may be astronomically large.

All weights are exact :class:`fractions.Fraction` values.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple, Union

Rational = Union[int, Fraction]


class NodeId(NamedTuple):
    level: int
    index: int


ROOT = NodeId(0, 0)


def as_fraction(value, name: str = "value") -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are rejected: every cost in this package is exact.
    """
    if isinstance(value, bool):
        raise TypeError(f"{name} must be rational, got bool")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"{name}: cannot parse {value!r} as a rational") from exc
    raise TypeError(f"{name} must be an int, Fraction or 'p/q' string, got {type(value).__name__}")


@dataclass(frozen=True)
class HstParams:
    """Shape and weights of a balanced HST.

    Per-level quantities are cached on first use: ``edge_weights[l]`` is the
    parent-edge weight of a level-``l`` vertex (``edge_weights[0] == 0``),
    ``cross_weights[l]`` the distance between two leaves whose lowest common
    ancestor sits on level ``l``.
    """

    b: int
    delta: int
    lam: Fraction
    scale: Fraction = field(default=Fraction(1))

    def __post_init__(self):
        if isinstance(self.b, bool) or not isinstance(self.b, int) or self.b < 2:
            raise ValueError(f"branching factor must be an integer >= 2, got {self.b!r}")
        if isinstance(self.delta, bool) or not isinstance(self.delta, int) or self.delta < 1:
            raise ValueError(f"depth must be an integer >= 1, got {self.delta!r}")
        lam = as_fraction(self.lam, "lambda")
        scale = as_fraction(self.scale, "scale")
        if not 0 < lam < 1:
            raise ValueError(f"lambda must lie in (0, 1), got {lam}")
        if scale <= 0:
            raise ValueError(f"scale must be positive, got {scale}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "scale", scale)

    @property
    def n_leaves(self) -> int:
        return self.b ** self.delta

    @cached_property
    def edge_weights(self) -> tuple[Fraction, ...]:
        return (Fraction(0),) + tuple(self.scale * self.lam ** l for l in range(1, self.delta + 1))

    @cached_property
    def lift_weights(self) -> tuple[Fraction, ...]:
        # lift_weights[l]: path cost from a leaf up to its level-l ancestor
        out = [Fraction(0)] * (self.delta + 1)
        for level in range(self.delta - 1, -1, -1):
            out[level] = out[level + 1] + self.edge_weights[level + 1]
        return tuple(out)

    @cached_property
    def cross_weights(self) -> tuple[Fraction, ...]:
        return tuple(2 * c for c in self.lift_weights)

    def level_size(self, level: int) -> int:
        return self.b ** level

    def check_node(self, v: NodeId) -> None:
        if not 0 <= v.level <= self.delta or not 0 <= v.index < self.b ** v.level:
            raise ValueError(f"{v} is not a vertex of a (b={self.b}, delta={self.delta}) HST")

    def leaf(self, index: int) -> NodeId:
        v = NodeId(self.delta, index)
        self.check_node(v)
        return v


def parent(v: NodeId, b: int) -> NodeId:
    if v.level == 0:
        raise ValueError("the root has no parent")
    return NodeId(v.level - 1, v.index // b)


def ancestor(v: NodeId, level: int, b: int) -> NodeId:
    if not 0 <= level <= v.level:
        raise ValueError(f"level {level} is not above {v}")
    return NodeId(level, v.index // b ** (v.level - level))


def edge_weight(params: HstParams, v: NodeId) -> Fraction:
    """Weight of the edge joining ``v`` to its parent."""
    params.check_node(v)
    if v.level == 0:
        raise ValueError("the root has no parent edge")
    return params.edge_weights[v.level]


def lca_level(u: NodeId, v: NodeId, b: int) -> int:
    level = min(u.level, v.level)
    iu = u.index // b ** (u.level - level)
    iv = v.index // b ** (v.level - level)
    while iu != iv:
        iu //= b
        iv //= b
        level -= 1
    return level


def leaf_lca_level(i: int, j: int, params: HstParams) -> int:
    """LCA level of leaves ``i`` and ``j`` given by index."""
    level = params.delta
    b = params.b
    while i != j:
        i //= b
        j //= b
        level -= 1
    return level


def lca(u: NodeId, v: NodeId, b: int) -> NodeId:
    level = lca_level(u, v, b)
    return ancestor(u, level, b)


def distance(params: HstParams, u: NodeId, v: NodeId) -> Fraction:
    """Exact tree distance between two vertices."""
    params.check_node(u)
    params.check_node(v)
    t = lca_level(u, v, params.b)
    lw = params.lift_weights
    return (lw[t] - lw[u.level]) + (lw[t] - lw[v.level])


def leaf_distance(params: HstParams, i: int, j: int) -> Fraction:
    return params.cross_weights[leaf_lca_level(i, j, params)]


def diameter(params: HstParams) -> Fraction:
    return params.cross_weights[0]


def ceil_log(b: int, n: int) -> int:
    """Smallest ``h >= 0`` with ``b**h >= n``, in exact integer arithmetic."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    h, p = 0, 1
    while p < n:
        p *= b
        h += 1
    return h


def effective_height(params: HstParams, n: int) -> int:
    return min(params.delta, ceil_log(params.b, n))


def lift(params: HstParams, leaf: NodeId, target_level: int) -> tuple[NodeId, Fraction]:
    """Ancestor of ``leaf`` on ``target_level`` and the one-way path cost to it."""
    params.check_node(leaf)
    if leaf.level != params.delta:
        raise ValueError(f"{leaf} is not a leaf")
    if not 0 <= target_level <= params.delta:
        raise ValueError(f"target level {target_level} outside [0, {params.delta}]")
    return ancestor(leaf, target_level, params.b), params.lift_weights[target_level]


def top_k_weight(params: HstParams, k: int) -> Fraction:
    """Total edge weight of the first ceil(log_b k) levels of the tree."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    levels = min(params.delta, ceil_log(params.b, k))
    bl = params.b * params.lam
    return params.scale * sum((bl ** i for i in range(1, levels + 1)), Fraction(0))
