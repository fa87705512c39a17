"""Command-line harness: single runs, the benchmark matrix, worst-case
constructions, and the theory-check battery."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from . import bench, driver, sharpness
from .problems import load_suite
from .driver import RunConfig, astr1, save_record, variant_config
from .scaling import VARIANT_TAGS, ScalingStrategy

ALL_VARIANTS = ["adag1", "adagi1", "adag2", "adagi2", "maxg01", "maxgi01",
                "sdba", "b1adagi1", "lmadagi3b", "Eadagi1"]


def _add_solve(sub):
    p = sub.add_parser("solve", help="run one variant on one problem")
    p.add_argument("--problem", required=True)
    p.add_argument("--variant", default="adagi1", choices=ALL_VARIANTS)
    p.add_argument("--model", default=None, choices=["none", "bb", "lbfgs3", "exact"],
                   help="override the variant's Hessian model")
    p.add_argument("--norm", default=None, choices=["inf", "2"],
                   help="override the trust-region norm")
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=100000)
    p.add_argument("--tau", type=float, default=0.1)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", default=None, help="write the run record as JSON")


def _cmd_solve(args) -> int:
    problem = load_suite([args.problem])[0]
    overrides = dict(eps=args.eps, max_iter=args.max_iter, tau=args.tau,
                     noise_level=args.noise, noise_seed=args.seed,
                     keep_trace=args.trace is not None)
    config = variant_config(args.variant, **overrides)
    if args.model is not None and args.variant != "sdba":
        config = dataclasses.replace(config, model=args.model)
    if args.norm is not None and args.variant != "sdba":
        config = dataclasses.replace(config, norm="two" if args.norm == "2" else "inf")
    record = driver.sdba(problem, config) if args.variant == "sdba" else astr1(problem, config)
    print(f"{problem.name} {args.variant}: status={record.status} "
          f"iters={record.iters} evals={record.evals} "
          f"final_gnorm={record.final_gnorm:.3e}")
    if args.trace:
        save_record(record, args.trace)
        print(f"trace written to {args.trace}")
    return 0


def _add_bench(sub):
    p = sub.add_parser("bench", help="run the experiment matrix")
    p.add_argument("--suite", default="all", help="'all' or comma-separated problem names")
    p.add_argument("--variants", default=",".join(ALL_VARIANTS))
    p.add_argument("--noise", default="0", help="comma-separated relative noise levels")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=100000)
    p.add_argument("--out", default="results.csv")
    p.add_argument("--stats", default="stats.csv")


def _cmd_bench(args) -> int:
    names = None if args.suite == "all" else [s.strip() for s in args.suite.split(",")]
    problems = load_suite(names)
    variants = [s.strip() for s in args.variants.split(",")]
    levels = [float(s) for s in args.noise.split(",")]
    results = bench.run_matrix(variants, problems, levels, reps=args.reps,
                               master_seed=args.seed, eps=args.eps,
                               max_iter=args.max_iter)
    bench.write_results_csv(results, args.out)
    stats = bench.write_stats_csv(results, args.stats)
    print(f"{len(results.cells)} runs -> {args.out}; stats -> {args.stats}")
    for level in levels:
        ranked = sorted(((stats["rho"][(v, level)], stats["pi"][(v, level)], v)
                         for v in variants), reverse=True)
        print(f"noise {level:g}: " + "  ".join(
            f"{v}(pi={p:.2f},rho={r:.1f})" for r, p, v in ranked))
    return 0


def _add_sharpness(sub):
    p = sub.add_parser("sharpness", help="build a slow-convergence counterexample")
    p.add_argument("--kind", required=True, choices=["sharp1", "sharp2"])
    p.add_argument("--mu", type=float, default=0.5)
    p.add_argument("--eta", type=float, default=0.01)
    p.add_argument("--varsigma", type=float, default=0.01)
    p.add_argument("--nu", type=float, default=1.0 / 9.0)
    p.add_argument("--omega", type=float, default=4.0 / 9.0 + 0.01)
    p.add_argument("--iters", type=int, default=10000)
    p.add_argument("--grid", type=int, default=None, help="grid points for the sampled CSV")
    p.add_argument("--shift-f0", type=float, default=None,
                   help="shift values so the first one lands here (display)")
    p.add_argument("--out", default="knots.csv")
    p.add_argument("--grid-out", default=None)
    p.add_argument("--verify", action="store_true",
                   help="also rerun the driver over the interpolant and report deviations")


def _cmd_sharpness(args) -> int:
    if args.kind == "sharp1":
        params = {"mu": args.mu, "eta": args.eta, "varsigma": args.varsigma}
    else:
        params = {"nu": args.nu, "omega": args.omega}
    knots = sharpness.build_counterexample(args.kind, params, args.iters)
    sharpness.export_knots(knots, args.out)
    print(f"{args.kind}: {knots.knot_count} knots -> {args.out}")
    if args.grid_out:
        sharpness.export_grid(knots, args.grid_out, num=args.grid,
                              shift_f0_to=args.shift_f0)
        print(f"grid -> {args.grid_out}")
    if args.verify:
        problem = sharpness.interpolant_problem(knots)
        config = RunConfig(scaling=knots.strategy, model="none", norm="inf",
                           eps=1e-30, max_iter=args.iters, keep_trace=True)
        record = astr1(problem, config)
        report = sharpness.verify_sharpness(knots, record)
        print(f"verify: knots={report['count']} "
              f"max|x-dev|={report['max_knot_dev']:.3e} "
              f"max rel |g|-dev={report['max_grad_rel_dev']:.3e}")
    return 0


def _add_check(sub):
    p = sub.add_parser("check", help="run the theory-verification battery")
    p.add_argument("--theory", action="store_true", default=True)
    p.add_argument("--iters", type=int, default=10000)
    p.add_argument("--out", default=None, help="write the report as JSON")


def _cmd_check(args) -> int:
    report = {"checks": []}

    series = bench.series_suite()
    report["checks"].append({"name": "summation-lemma-suite", **series,
                             "passed": series["violations"] == 0})

    problem = bench.quadratic_testbed(5)
    gamma0 = problem.value(problem.x0)
    for regime, mu in (("mu_lt_half", 0.25), ("mu_eq_half", 0.5), ("mu_gt_half", 0.75)):
        strat = ScalingStrategy(kind="adagrad-comp", mu=mu)
        config = RunConfig(scaling=strat, model="none", norm="inf",
                           eps=1e-30, max_iter=args.iters, keep_trace=True)
        record = astr1(problem, config)
        constants = bench.constants_from_run(record, L=1.0, Gamma0=gamma0)
        result = bench.theory_check(record, constants, regime)
        report["checks"].append({"name": f"bounds-{regime}",
                                 "violations": result["violations"],
                                 "passed": result["violations"] == 0})
    strat = ScalingStrategy(kind="maxg-comp", mu=0.1, nu=0.1)
    config = RunConfig(scaling=strat, model="none", norm="inf",
                       eps=1e-30, max_iter=args.iters, keep_trace=True)
    record = astr1(problem, config)
    constants = bench.constants_from_run(record, L=1.0, Gamma0=gamma0)
    result = bench.theory_check(record, constants, "ming")
    report["checks"].append({"name": "bounds-ming",
                             "violations": result["violations"],
                             "passed": result["violations"] == 0})

    # fdecrease on every scaling kind
    worst = np.inf
    for tag in sorted(VARIANT_TAGS):
        config = variant_config(tag, eps=1e-30, max_iter=args.iters,
                                keep_trace=True, record_f=True)
        record = astr1(problem, config)
        margins = driver.fdecrease_margins(record, L=1.0)
        worst = min(worst, float(np.min(margins)))
    report["checks"].append({"name": "guaranteed-decrease",
                             "min_margin": worst, "passed": worst >= -1e-8})

    wm1 = sharpness.lambert_wm1
    resid = max(abs(w * np.exp(w) - y)
                for y in (-1e-6, -0.05, -0.1, -0.2, -1 / np.e + 1e-9)
                for w in (wm1(y),))
    report["checks"].append({"name": "lambert-wm1-residual",
                             "max_residual": resid,
                             "passed": resid <= 1e-12 and wm1(-1 / np.e) == -1.0})

    passed = all(c["passed"] for c in report["checks"])
    for c in report["checks"]:
        print(f"[{'PASS' if c['passed'] else 'FAIL'}] {c['name']}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report, fh, indent=2, default=float)
        print(f"report -> {args.out}")
    return 0 if passed else 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="offo",
        description="Objective-function-free trust-region optimizers and their benchmark harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_solve(sub)
    _add_bench(sub)
    _add_sharpness(sub)
    _add_check(sub)
    args = parser.parse_args(argv)
    handler = {"solve": _cmd_solve, "bench": _cmd_bench,
               "sharpness": _cmd_sharpness, "check": _cmd_check}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
