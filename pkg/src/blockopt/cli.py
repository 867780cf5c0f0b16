"""Command-line front end: run, compare, enumerate, oracle."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from .benchmarks import grid_oracle, load_benchmark
from .objective import ObjectiveSpec, SubprocessEvaluator
from .plan import (
    COARSE_PLAN_NAMES,
    Annotations,
    PlanConfig,
    build,
    enumerate_coarse_plans,
    load_config,
    save_config,
)
from .space import SearchSpace

log = logging.getLogger("blockopt")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="blockopt", description="Decomposed black-box optimisation benchmarks.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def objective_flags(sp):
        src = sp.add_mutually_exclusive_group(required=True)
        src.add_argument("--benchmark", metavar="NAME")
        src.add_argument("--objective-cmd", metavar="CMD", help="child speaking the JSON line protocol")
        sp.add_argument("--dataset", metavar="PATH", help="passed to the child as its last argument")
        sp.add_argument("--timeout", type=float, default=60.0, help="per-evaluation deadline in seconds")

    def budget_flags(sp):
        sp.add_argument("--budget", type=float, help="overrides the plan's budget")
        sp.add_argument("--budget-mode", choices=("count", "seconds"), help="overrides the plan's budget mode")

    run = sub.add_parser("run", help="one plan, one objective, one seed")
    run.add_argument("--plan", required=True, metavar="PATH")
    objective_flags(run)
    budget_flags(run)
    run.add_argument("--seed", type=int)
    run.add_argument("--out", required=True, metavar="DIR")

    cmp_ = sub.add_parser("compare", help="several plans x seeds on one objective, with a rank table")
    plans = cmp_.add_mutually_exclusive_group(required=True)
    plans.add_argument("--plan", action="append", metavar="PATH", help="repeatable")
    plans.add_argument("--coarse", action="store_true", help="use the five coarse plans of an annotated benchmark")
    objective_flags(cmp_)
    budget_flags(cmp_)
    cmp_.add_argument("--seeds", type=int, default=10, help="runs use seeds 0..N-1")
    cmp_.add_argument("--jobs", type=int, default=1)
    cmp_.add_argument("--out", required=True, metavar="DIR")

    en = sub.add_parser("enumerate", help="print the five coarse plans of an annotated space")
    src = en.add_mutually_exclusive_group(required=True)
    src.add_argument("--benchmark", metavar="NAME")
    src.add_argument("--space", metavar="PATH", help="JSON list of variable declarations")
    en.add_argument("--annotations", metavar="PATH", help="JSON with algorithm_var, feature_vars, hp_vars")
    budget_flags(en)
    en.add_argument("--seed", type=int)
    en.add_argument("--out", metavar="DIR", help="also write one <name>.json per plan")

    orc = sub.add_parser("oracle", help="brute-force lattice argmin of a benchmark")
    orc.add_argument("--benchmark", required=True, metavar="NAME")
    orc.add_argument("--resolution", type=int, default=100)
    return p


def _override(cfg: PlanConfig, budget=None, budget_mode=None, seed=None) -> PlanConfig:
    changes = {k: v for k, v in (("budget", budget), ("budget_mode", budget_mode), ("seed", seed)) if v is not None}
    return replace(cfg, params=replace(cfg.params, **changes)) if changes else cfg


def _objective(args, space: SearchSpace) -> tuple[ObjectiveSpec, SubprocessEvaluator | None]:
    if args.benchmark:
        b = load_benchmark(args.benchmark)
        if b.space.names != space.names:
            raise ValueError(f"plan space does not match benchmark {b.name!r}")
        return b.objective(timeout=args.timeout), None
    child = SubprocessEvaluator(args.objective_cmd, args.dataset)
    return ObjectiveSpec(space, child, dataset_ref=args.dataset, timeout=args.timeout), child


def run_one(cfg: PlanConfig, args, out: Path) -> dict:
    """Execute one plan and write trajectory.jsonl (flushed per trial) and report.json."""
    out.mkdir(parents=True, exist_ok=True)
    objective, child = _objective(args, cfg.space)
    t0 = time.perf_counter()
    try:
        ex = build(cfg, objective)
        with open(out / "trajectory.jsonl", "w") as fh:
            def sink(cp):
                fh.write(cp.to_json() + "\n")
                fh.flush()
            ex.sinks.append(sink)
            incumbent, trajectory = ex.run()
    finally:
        if child is not None:
            child.close()
    report = {
        "config_digest": cfg.digest(),
        "seed": cfg.params.seed,
        "trajectory": [[cp.spent, cp.best] for cp in trajectory],
        "final_best": None if incumbent is None else {"assignment": incumbent[0], "value": incumbent[1]},
        "trials": len(ex.trials),
        "failed": sum(not t.ok for t in ex.trials),
        "wall_time": time.perf_counter() - t0,
    }
    (out / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    return report


def rank_table(rows: list[dict], plans: list[str]) -> dict[str, float]:
    """Mean rank per plan over seeds; ties share the average rank, runs without a best rank last."""
    seeds = sorted({r["seed"] for r in rows})
    by = {(r["plan"], r["seed"]): r["final_best"] for r in rows}
    ranks = {p: [] for p in plans}
    for s in seeds:
        vals = [by.get((p, s)) for p in plans]
        vals = [np.inf if v is None else v for v in vals]
        for p, r in zip(plans, rankdata(vals, method="average")):
            ranks[p].append(float(r))
    return {p: float(np.mean(ranks[p])) if ranks[p] else float("nan") for p in plans}


def _compare_job(job):
    name, cfg, args, out = job
    rep = run_one(cfg, args, out)
    best = rep["final_best"]
    return {"plan": name, "seed": cfg.params.seed, "final_best": None if best is None else best["value"],
            "trials": rep["trials"]}


def compare(named: list[tuple[str, PlanConfig]], args, out: Path) -> tuple[list[dict], dict[str, float]]:
    jobs = []
    for name, cfg in named:
        for seed in range(args.seeds):
            c = _override(cfg, args.budget, args.budget_mode, seed)
            jobs.append((name, c, args, out / name / f"seed_{seed}"))
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_compare_job, jobs))
    else:
        rows = [_compare_job(j) for j in jobs]
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["plan", "seed", "final_best", "trials"])
        w.writeheader()
        w.writerows(rows)
    ranks = rank_table(rows, [n for n, _ in named])
    with open(out / "ranks.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["plan", "mean_rank"])
        w.writerows(sorted(ranks.items(), key=lambda kv: kv[1]))
    return rows, ranks


def _coarse(space: SearchSpace, ann: Annotations | None, args) -> list[tuple[str, PlanConfig]]:
    if ann is None:
        raise ValueError("this space has no annotations; pass --annotations")
    cfgs = enumerate_coarse_plans(space, ann)
    return [(n, _override(c, args.budget, args.budget_mode, getattr(args, "seed", None)))
            for n, c in zip(COARSE_PLAN_NAMES, cfgs)]


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "run":
            cfg = _override(load_config(args.plan), args.budget, args.budget_mode, args.seed)
            rep = run_one(cfg, args, Path(args.out))
            best = rep["final_best"]
            print(f"trials={rep['trials']} failed={rep['failed']} best={None if best is None else best['value']}")
        elif args.command == "compare":
            if args.coarse:
                if not args.benchmark:
                    parser.error("--coarse needs --benchmark")
                b = load_benchmark(args.benchmark)
                named = _coarse(b.space, b.annotations, args)
            else:
                named = [(Path(p).stem, load_config(p)) for p in args.plan]
                if len({n for n, _ in named}) != len(named):
                    parser.error("plan file names must be distinct")
            _, ranks = compare(named, args, Path(args.out))
            print(f"{'plan':<16} mean_rank")
            for name, r in sorted(ranks.items(), key=lambda kv: kv[1]):
                print(f"{name:<16} {r:.2f}")
        elif args.command == "enumerate":
            if args.benchmark:
                b = load_benchmark(args.benchmark)
                space, ann = b.space, b.annotations
            else:
                space = SearchSpace.from_list(json.loads(Path(args.space).read_text()))
                ann = None
            if args.annotations:
                ann = Annotations.from_dict(json.loads(Path(args.annotations).read_text()))
            named = _coarse(space, ann, args)
            print(json.dumps({n: c.to_dict()["plan"] for n, c in named}, indent=2))
            if args.out:
                Path(args.out).mkdir(parents=True, exist_ok=True)
                for n, c in named:
                    save_config(c, Path(args.out) / f"{n}.json")
        else:
            a, v = grid_oracle(load_benchmark(args.benchmark), args.resolution)
            print(json.dumps({"assignment": a, "value": v}))
    except (KeyError, ValueError, OSError) as exc:
        print(f"blockopt: error: {exc}", file=sys.stderr)
        return 2
    return 0
