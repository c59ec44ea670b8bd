"""Command-line front end: ``hstopt solve``, ``hstopt estimate``, ``hstopt embed``.

Exit codes: 0 success, 1 failed check (oracle mismatch, domination
violation, tail bound exceeded), 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import re
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .bichromatic import bi_matching_cost, bi_mst_cost_exact, bi_mst_theta_bounds, bi_tsp_bounds
from .closed_form import azuma_tail
from .embed import GridSpec, build_grid_hst, check_domination, max_stretch, shifted_family_stretch
from .experiments import (ExperimentConfig, Functional, compare_tail, run_experiment, write_summary_json,
                          write_tail_csv, write_trials_csv)
from .hst import HstParams, diameter
from .mono import induced_tour_cost, matching_cost, mst_cost
from .oracles import DistanceMatrix, brute_matching, brute_mst, brute_tsp
from .sampling import ColoredSample, LeafMultiset, sample_colored, sample_leaves

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

PROBLEMS = ("mono-matching", "mono-tsp", "mono-mst", "bi-matching", "bi-mst", "bi-tsp")
RATIONAL = re.compile(r"^\s*[+-]?\d+(\s*/\s*\d+)?\s*$")

INSTANCE_HELP = """\
Instance files are CSV with a leaf_index column and, for bichromatic
problems, a color column holding 'red' or 'blue'.  A header row is optional.
"""


class UsageError(Exception):
    pass


def rational(text: str) -> Fraction:
    """argparse type: integer or 'p/q' literal; decimals are refused."""
    if not RATIONAL.match(text):
        raise argparse.ArgumentTypeError(f"expected an integer or 'p/q' rational, got {text!r}")
    try:
        return Fraction(text.replace(" ", ""))
    except ZeroDivisionError:
        raise argparse.ArgumentTypeError(f"zero denominator in {text!r}")


def seed_type(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def leaf_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated leaf indices, got {text!r}")


def float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def fmt(x: Fraction) -> dict:
    return {"exact": str(x), "decimal": float(x)}


def manifest(command: str, args: argparse.Namespace, started: float, outputs: Sequence[str] = ()) -> dict:
    config = {k: (str(v) if isinstance(v, (Fraction, Path)) else v)
              for k, v in vars(args).items() if k not in ("handler",)}
    return {
        "command": command,
        "config": config,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "wall_time": time.perf_counter() - started,
        "outputs": list(outputs),
    }


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--b", type=int, required=True, help="branching factor")
    p.add_argument("--delta", type=int, required=True, help="depth (leaves sit on this level)")
    p.add_argument("--lambda", dest="lam", type=rational, required=True, help="edge ratio as 'p/q'")
    p.add_argument("--scale", type=rational, default=Fraction(1), help="global weight multiplier")
    p.add_argument("--seed", type=seed_type, default=0)


def _params(args) -> HstParams:
    try:
        return HstParams(args.b, args.delta, args.lam, args.scale)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc))


def read_instance(path: Path, params: HstParams, colored: bool):
    red, blue, plain = [], [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip() or row[0].strip().startswith("#"):
                continue
            head = row[0].strip()
            if not head.lstrip("-").isdigit():
                continue  # header
            leaf = int(head)
            if colored:
                if len(row) < 2:
                    raise UsageError(f"{path}: bichromatic instance rows need a color column")
                color = row[1].strip().lower()
                if color not in ("red", "blue", "r", "b"):
                    raise UsageError(f"{path}: unknown color {row[1]!r}")
                (red if color.startswith("r") else blue).append(leaf)
            else:
                plain.append(leaf)
    try:
        if colored:
            return ColoredSample.from_points(params, red, blue)
        return LeafMultiset(params, tuple(plain))
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}")


def _instance(args, params: HstParams, colored: bool):
    if args.instance:
        return read_instance(args.instance, params, colored)
    try:
        if colored and (args.red is not None or args.blue is not None):
            return ColoredSample.from_points(params, args.red or [], args.blue or [])
        if not colored and args.leaves is not None:
            return LeafMultiset(params, tuple(args.leaves))
    except ValueError as exc:
        raise UsageError(str(exc))
    if args.n is None:
        raise UsageError("give --n (random sample), --instance, or explicit leaves")
    if args.n < 0:
        raise UsageError("--n must be >= 0")
    if colored:
        return sample_colored(params, args.n, args.seed, args.stream)
    return sample_leaves(params, args.n, args.seed, args.stream)


def _solve(problem: str, inst, include_root: bool) -> dict:
    if problem == "mono-matching":
        c = matching_cost(inst)
    elif problem == "mono-tsp":
        c = induced_tour_cost(inst, include_root=include_root)
    elif problem == "mono-mst":
        c = mst_cost(inst)
    elif problem == "bi-matching":
        return {"cost": fmt(bi_matching_cost(inst))}
    elif problem == "bi-mst":
        th = bi_mst_theta_bounds(inst)
        return {"cost": fmt(bi_mst_cost_exact(inst)), "theta_lower": fmt(th.lower), "theta_upper": fmt(th.upper)}
    else:
        bd = bi_tsp_bounds(inst)
        return {"lower": fmt(bd.lower), "upper": fmt(bd.upper)}
    return {"cost": fmt(c.total), "per_level": [str(x) for x in c.per_level]}


def _oracle(problem: str, inst) -> Fraction:
    if problem.startswith("bi-"):
        m = DistanceMatrix.from_colored(inst)
        if problem == "bi-matching":
            return brute_matching(m, bichromatic=True)
        if problem == "bi-mst":
            return brute_mst(m, bichromatic=True)
        return brute_tsp(m, alternating=True)
    m = DistanceMatrix.from_sample(inst)
    if problem == "mono-matching":
        return brute_matching(m)
    if problem == "mono-tsp":
        return brute_tsp(m)
    return brute_mst(m)


def cmd_solve(args) -> int:
    started = time.perf_counter()
    params = _params(args)
    colored = args.problem.startswith("bi-")
    inst = _instance(args, params, colored)
    if args.include_root and args.problem != "mono-tsp":
        raise UsageError("--include-root applies to mono-tsp only")
    try:
        out = {"problem": args.problem, **_solve(args.problem, inst, args.include_root)}
    except ValueError as exc:
        raise UsageError(str(exc))
    if colored:
        out["instance"] = {"red": list(inst.red.points), "blue": list(inst.blue.points)}
    else:
        out["instance"] = {"leaves": list(inst.points)}
    code = EXIT_OK
    if args.oracle:
        if args.include_root:
            raise UsageError("the oracle solves the rootless tour; drop --include-root")
        try:
            exact = _oracle(args.problem, inst)
        except ValueError as exc:
            raise UsageError(f"oracle: {exc}")
        out["oracle"] = fmt(exact)
        if args.problem == "bi-tsp":
            ok = Fraction(out["lower"]["exact"]) <= exact <= Fraction(out["upper"]["exact"])
        else:
            ok = Fraction(out["cost"]["exact"]) == exact
        out["verdict"] = "MATCH" if ok else "MISMATCH"
        code = EXIT_OK if ok else EXIT_FAIL
    out["manifest"] = manifest("solve", args, started)
    print(json.dumps(out, indent=2))
    return code


def cmd_estimate(args) -> int:
    started = time.perf_counter()
    params = _params(args)
    try:
        cfg = ExperimentConfig(params, args.n, args.trials, args.seed, Functional(args.functional.replace("-", "_")),
                               tuple(args.tail_grid), args.include_root, args.workers)
    except ValueError as exc:
        raise UsageError(str(exc))
    report = run_experiment(cfg)
    verdict = None
    code = EXIT_OK
    if args.azuma:
        if not cfg.tail_grid:
            raise UsageError("--azuma needs a --tail-grid")
        step = float(diameter(params))
        verdict = compare_tail(report, lambda t: azuma_tail(t, cfg.n, step))
        code = EXIT_OK if verdict.passed else EXIT_FAIL
    outputs = []
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        paths = {"trials": args.out / "trials.csv", "tail": args.out / "tail.csv", "summary": args.out / "summary.json"}
        write_trials_csv(paths["trials"], report)
        write_tail_csv(paths["tail"], report, verdict)
        outputs = [str(p) for p in paths.values()]
    man = manifest("estimate", args, started, outputs)
    man["experiment"] = cfg.describe()
    if args.out:
        write_summary_json(args.out / "summary.json", report, man)
    doc = report.summary()
    if verdict is not None:
        doc["azuma"] = {"passed": verdict.passed, "worst_margin": verdict.worst_margin}
    doc["manifest"] = man
    print(json.dumps(doc, indent=2))
    return code


def _read_points(path: Path, d: int) -> list[list[Fraction]]:
    pts = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            cells = [c.strip() for c in row if c.strip()]
            if not cells or cells[0].startswith("#"):
                continue
            try:
                coords = [Fraction(c) for c in cells]
            except ValueError:
                continue  # header
            if len(coords) != d:
                raise UsageError(f"{path}: expected {d} coordinates per row, got {len(coords)}")
            pts.append(coords)
    return pts


def cmd_embed(args) -> int:
    started = time.perf_counter()
    try:
        spec = GridSpec(args.d, args.s, args.shift)
    except ValueError as exc:
        raise UsageError(str(exc))
    g = build_grid_hst(spec)
    p = g.params
    out = {"tree": {"b": p.b, "delta": p.delta, "lambda": str(p.lam), "scale": str(p.scale),
                    "diameter": fmt(diameter(p)), "leaves": p.n_leaves}}
    code = EXIT_OK
    outputs = []
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
    if args.check_domination:
        v = check_domination(spec, args.seed)
        out["domination"] = {"passed": v.passed, "pairs_checked": v.pairs_checked, "exhaustive": v.exhaustive}
        if v.violation:
            i, j, tree, sq = v.violation
            out["domination"]["violation"] = {"leaves": [i, j], "tree": str(tree), "squared_metric": str(sq)}
            code = EXIT_FAIL
    if args.stretch:
        if spec.d != 1:
            raise UsageError("--stretch needs --d 1")
        rows = shifted_family_stretch(GridSpec(1, spec.s))
        worst = max_stretch(rows)
        out["stretch"] = {"max": fmt(worst), "log2_n": spec.s.bit_length() - 1}
        if args.out:
            path = args.out / "stretch.csv"
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["p", "q", "euclidean", "expected_tree", "stretch"])
                w.writerows([r.p, r.q, str(r.euclidean), str(r.expected_tree), str(r.stretch)] for r in rows)
            outputs.append(str(path))
    if args.points:
        if spec.shift is not None:
            raise UsageError("--points uses the unshifted grid; drop --shift")
        try:
            leaves = [g.snap(x) for x in _read_points(args.points, spec.d)]
        except ValueError as exc:
            raise UsageError(str(exc))
        out["leaves"] = leaves
        if args.out:
            path = args.out / "leaves.csv"
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["leaf_index"])
                w.writerows([x] for x in leaves)
            outputs.append(str(path))
    out["manifest"] = manifest("embed", args, started, outputs)
    print(json.dumps(out, indent=2))
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hstopt", description="Exact optimisation on random points in balanced HSTs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve one instance", epilog=INSTANCE_HELP,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
    solve.add_argument("--problem", choices=PROBLEMS, required=True)
    _add_model_flags(solve)
    solve.add_argument("--n", type=int, help="random sample size (per colour for bichromatic problems)")
    solve.add_argument("--stream", type=int, default=0)
    solve.add_argument("--instance", type=Path, help="CSV instance file")
    solve.add_argument("--leaves", type=leaf_list, help="explicit leaves, e.g. 0,1,3")
    solve.add_argument("--red", type=leaf_list)
    solve.add_argument("--blue", type=leaf_list)
    solve.add_argument("--include-root", action="store_true", help="mono-tsp: tour also visits the root")
    solve.add_argument("--oracle", action="store_true", help="compare with the brute-force oracle")
    solve.set_defaults(handler=cmd_solve)

    est = sub.add_parser("estimate", help="Monte Carlo estimate of a functional")
    _add_model_flags(est)
    est.add_argument("--functional", required=True,
                     choices=[f.value for f in Functional] + [f.value.replace("_", "-") for f in Functional])
    est.add_argument("--n", type=int, required=True)
    est.add_argument("--trials", type=int, required=True)
    est.add_argument("--tail-grid", type=float_list, default=[])
    est.add_argument("--out", type=Path, help="directory for trials.csv, tail.csv and summary.json")
    est.add_argument("--workers", type=int, default=1)
    est.add_argument("--include-root", action="store_true")
    est.add_argument("--azuma", action="store_true", help="test the tail against Azuma with step = diameter")
    est.set_defaults(handler=cmd_estimate)

    emb = sub.add_parser("embed", help="grid HST over [0,1]^d")
    emb.add_argument("--d", type=int, required=True)
    emb.add_argument("--s", type=int, required=True, help="cells per axis, a power of 2")
    emb.add_argument("--shift", type=int, help="torus shift (d = 1)")
    emb.add_argument("--check-domination", action="store_true")
    emb.add_argument("--stretch", action="store_true", help="exact expected stretch over all torus shifts")
    emb.add_argument("--points", type=Path, help="CSV of points in [0,1]^d to snap to leaves")
    emb.add_argument("--out", type=Path)
    emb.add_argument("--seed", type=seed_type, default=0, help="pair sampling for large grids")
    emb.set_defaults(handler=cmd_embed)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"hstopt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
