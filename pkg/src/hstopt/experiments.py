"""Monte Carlo estimation of solver functionals with reproducible replication.

Trial ``i`` draws its sample from stream ``i`` of the configured seed, and
results are always aggregated in stream order, so a report depends only on
the configuration and never on the number of worker processes.
"""
from __future__ import annotations

import csv
import enum
import json
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Sequence

from .bichromatic import bi_matching_cost, bi_mst_cost_exact, bi_tsp_bounds
from .closed_form import bi_matching_scaling, bi_tour_scaling, mono_scaling
from .hst import HstParams
from .mono import induced_tour_cost, matching_cost, mst_cost
from .sampling import sample_colored, sample_leaves


class Functional(str, enum.Enum):
    MONO_MATCHING = "mono_matching"
    MONO_TSP = "mono_tsp"
    MONO_MST = "mono_mst"
    BI_MATCHING = "bi_matching"
    BI_MST = "bi_mst"
    BI_TSP_UPPER = "bi_tsp_upper"
    BI_TSP_LOWER = "bi_tsp_lower"

    @property
    def bichromatic(self) -> bool:
        return self.value.startswith("bi_")


@dataclass(frozen=True)
class ExperimentConfig:
    params: HstParams
    n: int
    trials: int
    seed: int
    functional: Functional
    tail_grid: tuple[float, ...] = ()
    include_root: bool = False
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "functional", Functional(self.functional))
        object.__setattr__(self, "tail_grid", tuple(float(t) for t in self.tail_grid))
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        grid = self.tail_grid
        if any(t < 0 for t in grid) or any(a >= b for a, b in zip(grid, grid[1:])):
            raise ValueError("tail thresholds must be nonnegative and strictly increasing")
        if self.include_root and self.functional is not Functional.MONO_TSP:
            raise ValueError("include_root applies to mono_tsp only")

    def describe(self) -> dict:
        p = self.params
        return {
            "b": p.b, "delta": p.delta, "lambda": str(p.lam), "scale": str(p.scale),
            "n": self.n, "trials": self.trials, "seed": self.seed,
            "functional": self.functional.value, "tail_grid": list(self.tail_grid),
            "include_root": self.include_root,
        }


@dataclass
class EstimateReport:
    mean: float
    std_error: float
    median: float
    min: float
    max: float
    tail: list[tuple[float, float]]
    trials: int
    wall_time: float
    values: list[float] = field(repr=False, default_factory=list)

    def summary(self) -> dict:
        out = asdict(self)
        out.pop("values")
        out["tail"] = [list(row) for row in self.tail]
        return out


def evaluate(params: HstParams, n: int, functional: Functional, seed: int, stream: int,
             include_root: bool = False) -> Fraction:
    """Exact value of one functional on the sample drawn from ``(seed, stream)``."""
    functional = Functional(functional)
    if functional.bichromatic:
        s = sample_colored(params, n, seed, stream)
        if functional is Functional.BI_MATCHING:
            return bi_matching_cost(s)
        if functional is Functional.BI_MST:
            return bi_mst_cost_exact(s)
        bounds = bi_tsp_bounds(s)
        return bounds.upper if functional is Functional.BI_TSP_UPPER else bounds.lower
    w = sample_leaves(params, n, seed, stream)
    if functional is Functional.MONO_MATCHING:
        return matching_cost(w).total
    if functional is Functional.MONO_TSP:
        return induced_tour_cost(w, include_root=include_root).total
    return mst_cost(w).total


def _run_block(cfg: ExperimentConfig, start: int, stop: int) -> list[float]:
    return [float(evaluate(cfg.params, cfg.n, cfg.functional, cfg.seed, i, cfg.include_root))
            for i in range(start, stop)]


def _blocks(trials: int, workers: int) -> list[tuple[int, int]]:
    per = max(1, math.ceil(trials / (workers * 4)))
    return [(a, min(a + per, trials)) for a in range(0, trials, per)]


def empirical_tail(values: Sequence[float], center: float, grid: Sequence[float]) -> list[tuple[float, float]]:
    """``P(|L - center| >= t)`` for every t in the grid."""
    dev = [abs(v - center) for v in values]
    return [(t, sum(d >= t for d in dev) / len(dev)) for t in grid]


def summarize(values: Sequence[float], grid: Sequence[float] = (), wall_time: float = 0.0) -> EstimateReport:
    values = list(values)
    k = len(values)
    if k == 0:
        raise ValueError("no values to summarize")
    mean = math.fsum(values) / k
    se = statistics.stdev(values) / math.sqrt(k) if k > 1 else 0.0
    return EstimateReport(mean, se, statistics.median(values), min(values), max(values),
                          empirical_tail(values, mean, grid), k, wall_time, values)


def run_experiment(cfg: ExperimentConfig) -> EstimateReport:
    start = time.perf_counter()
    if cfg.workers == 1:
        values = _run_block(cfg, 0, cfg.trials)
    else:
        blocks = _blocks(cfg.trials, cfg.workers)
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            parts = pool.map(_run_block, [cfg] * len(blocks), *zip(*blocks))
            values = [v for part in parts for v in part]
    return summarize(values, cfg.tail_grid, time.perf_counter() - start)


@dataclass
class TailVerdict:
    passed: bool
    worst_margin: float
    rows: list[dict]


def compare_tail(report: EstimateReport, bound: Callable[[float], float]) -> TailVerdict:
    """Empirical tail against a bound, with three binomial standard errors of slack.

    ``worst_margin`` is the smallest ``bound + slack - empirical`` over the grid.
    """
    if not report.tail:
        raise ValueError("report has an empty tail grid")
    rows = []
    for t, p in report.tail:
        slack = 3 * math.sqrt(p * (1 - p) / report.trials)
        b = bound(t)
        margin = b + slack - p
        rows.append({"t": t, "empirical": p, "bound": b, "slack": slack, "margin": margin, "ok": margin >= 0})
    worst = min(r["margin"] for r in rows)
    return TailVerdict(worst >= 0, worst, rows)


def analytic_scale(functional: Functional, params: HstParams, n: int) -> float:
    """Growth rate each functional is compared against in a scaling sweep."""
    functional = Functional(functional)
    if functional is Functional.BI_MATCHING:
        return bi_matching_scaling(params, n)
    if functional in (Functional.BI_TSP_UPPER, Functional.BI_TSP_LOWER):
        return bi_tour_scaling(params, n)
    return float(mono_scaling(params, n))


@dataclass
class ScalingRow:
    n: int
    mean: float
    std_error: float
    scale: float
    ratio: float


def scaling_sweep(base: ExperimentConfig, n_list: Sequence[int]) -> list[ScalingRow]:
    if not n_list:
        raise ValueError("n_list must be nonempty")
    rows = []
    for n in n_list:
        cfg = ExperimentConfig(base.params, n, base.trials, base.seed, base.functional,
                               base.tail_grid, base.include_root, base.workers)
        rep = run_experiment(cfg)
        scale = analytic_scale(base.functional, base.params, n)
        rows.append(ScalingRow(n, rep.mean, rep.std_error, scale, rep.mean / scale if scale else math.nan))
    return rows


def ratio_spread(rows: Sequence[ScalingRow]) -> float:
    """max ratio / min ratio across a sweep."""
    ratios = [r.ratio for r in rows]
    return max(ratios) / min(ratios)


def write_trials_csv(path: Path, report: EstimateReport) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["stream", "value"])
        writer.writerows(enumerate(report.values))


def write_tail_csv(path: Path, report: EstimateReport, verdict: Optional[TailVerdict] = None) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if verdict is None:
            writer.writerow(["t", "empirical"])
            writer.writerows(report.tail)
        else:
            writer.writerow(["t", "empirical", "bound", "slack", "ok"])
            writer.writerows([r["t"], r["empirical"], r["bound"], r["slack"], r["ok"]] for r in verdict.rows)


def write_summary_json(path: Path, report: EstimateReport, manifest: dict) -> None:
    doc = report.summary()
    doc["manifest"] = manifest
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
