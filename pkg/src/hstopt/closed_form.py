"""Closed-form expectations, envelopes and tail bounds.

Rational quantities are returned as exact Fractions.  Quantities involving
square roots, exponentials or logarithms are evaluated in double precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .hst import HstParams, as_fraction, effective_height

Real = Union[float, Fraction]
TOLERANCE = 1e-12


@dataclass(frozen=True)
class BoundEnvelope:
    lower: Real
    upper: Real
    description: str = ""

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"envelope lower {self.lower} exceeds upper {self.upper}")

    def __contains__(self, value) -> bool:
        return self.lower <= value <= self.upper


def geometric_level_sum(params: HstParams, h: int) -> Fraction:
    """Sum of (b * lam)**k for k = 1..h."""
    if not 0 <= h <= params.delta:
        raise ValueError(f"h must lie in [0, {params.delta}], got {h}")
    bl = params.b * params.lam
    return sum((bl ** k for k in range(1, h + 1)), Fraction(0))


def parity_prob(r, n: int) -> Fraction:
    """Probability that a Binomial(n, r) count is odd."""
    r = as_fraction(r, "r")
    if not 0 < r <= 1:
        raise ValueError(f"r must lie in (0, 1], got {r}")
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    return Fraction(1, 2) - Fraction(1, 2) * (1 - 2 * r) ** n


def order_stat_prob(m: int, n: int, i: int, j: int) -> Fraction:
    """Probability that the minimum of n uniform draws from 1..m lies in [i, j]."""
    if not 1 <= i <= j <= m:
        raise ValueError(f"need 1 <= i <= j <= m, got i={i}, j={j}, m={m}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return Fraction((m - i + 1) ** n - (m - j) ** n, m ** n)


def expected_tour_with_root(params: HstParams, n: int) -> Fraction:
    """Expected length of the tour through n uniform leaves and the root.

    Level l contributes twice its edge weight for each of its b**l vertices
    that holds at least one point.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    b, lam = params.b, params.lam
    total = Fraction(0)
    for level in range(1, params.delta + 1):
        miss = (1 - Fraction(1, b ** level)) ** n
        total += (b * lam) ** level * (1 - miss)
    return 2 * params.scale * total


def expected_transits(params: HstParams, n: int) -> tuple[Fraction, ...]:
    """Expected number of matched pairs with their LCA at one given level-k vertex."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    b = params.b
    out = []
    for k in range(params.delta):
        odd_children = b * parity_prob(Fraction(1, b ** (k + 1)), n)
        own = Fraction(n & 1) if k == 0 else parity_prob(Fraction(1, b ** k), n)
        out.append((odd_children - own) / 2)
    return tuple(out)


def expected_matching_cost(params: HstParams, n: int) -> Fraction:
    """Exact expectation of the optimal matching cost on n uniform leaves."""
    cw = params.cross_weights
    return sum((params.b ** k * t * cw[k] for k, t in enumerate(expected_transits(params, n))),
               Fraction(0))


def matching_envelope(params: HstParams, n: int) -> BoundEnvelope:
    """Level-by-level bracket on the expected matching cost.

    A transit at level k costs between ``2 scale lam**(k+1)`` and that over
    ``1 - lam``.  Expected transits per vertex are at most (b - 1)/4 below the
    root (b/4 at the root), and never more than half the expected number of
    occupied children.  They are at least (b - 1)/8 at non-root levels with
    n >= b**(k+1); other levels contribute 0 to the lower side.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    b, lam, scale = params.b, params.lam, params.scale
    lower = upper = Fraction(0)
    for k in range(params.delta):
        vertices = b ** k
        short = 2 * scale * lam ** (k + 1)
        cap = Fraction(b, 4) if k == 0 else Fraction(b - 1, 4)
        per_vertex = min(cap, Fraction(n, 2 * vertices))
        upper += vertices * per_vertex * short / (1 - lam)
        if k >= 1 and n >= b ** (k + 1):
            lower += vertices * Fraction(b - 1, 8) * short
    return BoundEnvelope(lower, upper, "expected optimal matching cost, level-sum bracket")


def expected_violet_path(params: HstParams, n_blue: int) -> Fraction:
    """Expected distance from a fixed leaf to the nearest of n_blue uniform leaves.

    The lowest common ancestor of the leaf and its nearest blue point is l
    levels up with probability ``order_stat_prob(b**delta, n_blue, b**(l-1)+1, b**l)``.
    """
    if n_blue < 1:
        raise ValueError(f"n_blue must be >= 1, got {n_blue}")
    b, delta = params.b, params.delta
    m = b ** delta
    return sum((params.cross_weights[delta - up] * order_stat_prob(m, n_blue, b ** (up - 1) + 1, b ** up)
                for up in range(1, delta + 1)), Fraction(0))


def violet_level_distribution(params: HstParams, n_blue: int) -> tuple[Fraction, ...]:
    """Entry l: probability the lowest violet ancestor of a fixed leaf is l levels up."""
    b, delta = params.b, params.delta
    m = b ** delta
    probs = [order_stat_prob(m, n_blue, 1, 1)]
    probs += [order_stat_prob(m, n_blue, b ** (up - 1) + 1, b ** up) for up in range(1, delta + 1)]
    return tuple(probs)


def _check_tail_args(t: float, n: int) -> None:
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")


def azuma_tail(t: float, n: int, sigma_per_step: float) -> float:
    """Two-sided Azuma-Hoeffding bound for n martingale steps of size sigma_per_step."""
    _check_tail_args(t, n)
    if sigma_per_step <= 0:
        raise ValueError("sigma_per_step must be positive")
    return 2.0 * math.exp(-float(t) ** 2 / (2.0 * n * float(sigma_per_step) ** 2))


def iso_tail(t: float, n: int) -> float:
    _check_tail_args(t, n)
    return 4.0 * math.exp(-float(t) ** 2 / (8.0 * n))


def concentration_tail(params: HstParams, t: float, n: int, c: float) -> float:
    """Matching-cost tail shape; ``c`` is a caller-chosen constant."""
    _check_tail_args(t, n)
    if c <= 0:
        raise ValueError("c must be positive")
    bl = params.b * params.lam
    if bl < 1:
        raise ValueError(f"no tail form for b*lambda = {bl} < 1")
    if bl == 1:
        return 8.0 * math.exp(-(params.b ** (float(t) / c)) / (8.0 * n))
    exponent = 2.0 / math.log(float(bl), params.b)
    return 8.0 * math.exp(-float(t) ** exponent / (c * n))


def tail_exponent(params: HstParams) -> float:
    """Power of t in the bl > 1 branch of :func:`concentration_tail`."""
    bl = params.b * params.lam
    if bl <= 1:
        raise ValueError("power-law exponent needs b*lambda > 1")
    return 2.0 / math.log(float(bl), params.b)


def discrepancy_moment_bounds(n: int, p) -> BoundEnvelope:
    """Bracket on E|R - B| for independent R, B ~ Binomial(n, p)."""
    p = as_fraction(p, "p")
    if not 0 < p <= Fraction(1, 2):
        raise ValueError(f"p must lie in (0, 1/2], got {p}")
    if n * p < 1:
        raise ValueError(f"need n >= 1/p, got n={n}, p={p}")
    pf = float(p)
    var = 2 * n * pf * (1 - pf)
    fourth = var + 24 * n * (n - 1) * pf ** 2 * (1 - pf) ** 2
    return BoundEnvelope(var ** 1.5 / math.sqrt(fourth), math.sqrt(var), "E|R(v) - B(v)|")


def _sqrt_level_sum(params: HstParams, h: int) -> float:
    q = math.sqrt(params.b) * float(params.lam)
    return sum(q ** i for i in range(1, h + 1))


def bi_tour_scaling(params: HstParams, n: int) -> float:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return float(params.scale) * math.sqrt(n) * _sqrt_level_sum(params, effective_height(params, n))


def bi_matching_scaling(params: HstParams, n: int) -> float:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return float(params.scale) * math.sqrt(params.b * n) * _sqrt_level_sum(params, effective_height(params, n))


def mono_scaling(params: HstParams, n: int) -> Fraction:
    """scale * sum (b lam)**k up to the effective height."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return params.scale * geometric_level_sum(params, effective_height(params, n))


@dataclass
class InequalityResult:
    name: str
    checked: int
    passed: bool
    counterexample: Optional[dict] = None


@dataclass
class InequalityReport:
    seed: int
    results: list[InequalityResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def summary(self) -> str:
        lines = []
        for r in self.results:
            status = "pass" if r.passed else f"FAIL at {r.counterexample}"
            lines.append(f"{r.name}: {r.checked} points, {status}")
        return "\n".join(lines)


def _first_failure(ok: np.ndarray, **cols) -> Optional[dict]:
    bad = np.flatnonzero(~ok)
    if bad.size == 0:
        return None
    k = int(bad[0])
    return {name: float(v[k]) for name, v in cols.items()}


def _result(name: str, ok: np.ndarray, **cols) -> InequalityResult:
    cx = _first_failure(ok, **cols)
    return InequalityResult(name, int(ok.size), cx is None, cx)


def check_analytic_inequalities(seed: int, points: int = 20_000) -> InequalityReport:
    """Check the exponential, order-statistic and ratio inequalities on random grids.

    Every comparison is done on logarithms with relative slack ``TOLERANCE``.
    """
    if points < 1:
        raise ValueError("points must be >= 1")
    rng = np.random.default_rng(seed)
    report = InequalityReport(seed)
    tol = TOLERANCE

    # (1 + r/n)^n lies strictly between e^(r/2) and e^r when n > r
    r = rng.uniform(0.01, 50.0, points)
    n = np.floor(r) + 1 + rng.integers(0, 10 ** 6, points)
    logv = n * np.log1p(r / n)
    ok = (logv > r / 2) & (logv < r)
    report.results.append(_result("(1+r/n)^n in (e^(r/2), e^r)", ok, r=r, n=n))

    # (1 - r/n)^n lies strictly between e^(-3r/2) and e^(-r) when n > 3r
    r = rng.uniform(0.01, 50.0, points)
    n = np.floor(3 * r) + 1 + rng.integers(0, 10 ** 6, points)
    logv = n * np.log1p(-r / n)
    ok = (logv > -1.5 * r) & (logv < -r)
    report.results.append(_result("(1-r/n)^n in (e^(-3r/2), e^(-r))", ok, r=r, n=n))

    # n (1 - 1/z)^n < z for z >= 1
    z = np.exp(rng.uniform(0.0, math.log(1e4), points))
    z[: max(1, points // 100)] = 1.0
    n = rng.integers(1, 10 ** 6, points).astype(float)
    with np.errstate(divide="ignore"):
        lhs = np.log(n) + n * np.log1p(-1.0 / z)
    ok = lhs < np.log(z)
    report.results.append(_result("n(1-1/z)^n < z", ok, z=z, n=n))

    # violet-level probability is at least a fifth of the survival term, n >= b^delta
    b = rng.integers(2, 17, points).astype(float)
    delta = np.array([rng.integers(1, max(2, int(40 / math.log2(bb)))) for bb in b], dtype=float)
    n = np.floor(b ** delta * (1 + rng.exponential(2.0, points)))
    n = np.maximum(n, 2)
    level = np.floor(rng.uniform(0, 1, points) * delta) + 1
    log_a = n * np.log1p(-(b ** (level - delta - 1)))
    with np.errstate(divide="ignore"):
        log_b = np.where(level < delta, n * np.log1p(-(b ** (level - delta))), -np.inf)
    # log P = log_a + log(1 - exp(log_b - log_a)); compare with log(1/5) + log_a
    gap = np.log1p(-np.exp(log_b - log_a))
    ok = gap >= math.log(0.2)
    report.results.append(_result("P(b^d, n, b^(l-1)+1, b^l) >= (1/5)(1-b^(l-d-1))^n", ok,
                                  b=b, delta=delta, n=n, level=level))

    # a_l / a_(l+1) >= 1/lam for l from the cutoff to delta - 1
    rows = []
    while len(rows) < points:
        lam = rng.uniform(0.01, 0.99)
        bb = int(rng.integers(2, 17))
        cutoff = math.log(8 * math.log(1 / lam), bb) + 1
        nn = int(math.exp(rng.uniform(math.log(max(2.0, 4 * math.log(1 / lam) + 1)), math.log(1e9))))
        if nn <= 4 * math.log(1 / lam):
            continue
        top = int(math.floor(math.log(nn, bb) + 1e-12))
        while bb ** top > nn:
            top -= 1
        if top < 1:
            continue
        dd = int(rng.integers(1, top + 1))
        lo = max(0, math.ceil(cutoff))
        if lo > dd - 1:
            continue
        ll = int(rng.integers(lo, dd))
        rows.append((lam, bb, nn, dd, ll))
    lam, b, n, delta, level = (np.array(col, dtype=float) for col in zip(*rows))
    z = b ** (level - delta)
    log_ratio = np.log(lam) + n * (np.log1p(-z / b) - np.log1p(-z))
    ok = log_ratio >= -np.log(lam) - tol * np.abs(np.log(lam))
    report.results.append(_result("a_l / a_(l+1) >= 1/lam beyond the cutoff", ok,
                                  lam=lam, b=b, n=n, delta=delta, level=level))
    return report
