"""Command-line front end.

Subcommands:

* ``run``        -- simulate a player against a bundled or file instance
* ``lowerbound`` -- run a constructive adversary and compare to its bound
* ``verify``     -- run a named verification suite
* ``search``     -- randomized steep-instance counterexample search
* ``instances``  -- list or export the bundled instances

Exit status: 0 = all hard checks passed, 1 = a check failed,
2 = usage/config error.  Every rational in machine-readable output is an
exact "p/q" string; floating-point values appear only in explicitly
approximate fields.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .adversaries import simulate_flushing_lb
from .analysis import (
    additive_lb_bound,
    flushing_cups_needed,
    multiplicative_lb_bound,
)
from .bamboosim import run_to_trace, simulate_fixed_rate
from .engine import save_trace
from .errors import CupGameError
from .instances import (
    BUNDLED,
    check_timeline,
    get_instance,
    instance_to_json,
    load_instance,
    save_instance,
)
from .rationals import format_ratio, parse_ratio
from .search import (
    SearchConfig,
    append_results,
    hill_climb,
    replay_verify,
    search_seeds,
)
from .verify import SUITES, run_suite

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


def _emit(obj: dict) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _load_any_instance(ref: str):
    if ref in BUNDLED:
        return get_instance(ref)
    return load_instance(ref)


def cmd_run(args) -> int:
    if args.config:
        with open(args.config) as fp:
            cfg = json.load(fp)
        ref = cfg.get("instance", args.instance)
        player = cfg.get("player", args.player)
        steps = cfg.get("steps", args.steps)
        out = cfg.get("out", args.out)
    else:
        ref, player, steps, out = args.instance, args.player, args.steps, args.out
    if ref is None:
        raise CupGameError("no instance given (use --instance or --config)")
    instance = _load_any_instance(ref)
    if steps is None:
        steps = (instance.expected_backlog_step or 10000) + 1000
    run = simulate_fixed_rate(instance.rates, player=player, steps=int(steps))
    summary = {
        "instance": instance.name,
        "player": player,
        "adversary": "fixed-rate",
        "steps": run.steps,
        "backlog": format_ratio(run.backlog),
        "backlog_step": run.backlog_step,
    }
    if instance.timeline:
        report = check_timeline(run, instance)
        summary["timeline_hard_ok"] = report.hard_ok
        summary["timeline_soft_misses"] = len(report.soft_misses)
    if out:
        save_trace(run_to_trace(run), out)
        summary["trace"] = str(out)
    _emit(summary)
    if instance.expected_backlog is not None and player == "greedy":
        return EXIT_OK if run.backlog == instance.expected_backlog else EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_lowerbound(args) -> int:
    from .verify import run_additive_lb, run_multiplicative_lb

    n, c = args.n, parse_ratio(args.c)
    if args.game == "multiplicative":
        trace, adv = run_multiplicative_lb(n, c)
        bound = multiplicative_lb_bound(n, c)
        achieved = adv.final_height
        ok = achieved > bound
        summary = {
            "game": "multiplicative", "n": n, "c": format_ratio(c),
            "steps": len(trace),
            "final_height": format_ratio(achieved),
            "backlog": format_ratio(trace.backlog),
            "bound": format_ratio(bound),
            "achieved_exceeds_bound": ok,
        }
    elif args.game == "additive":
        trace, adv = run_additive_lb(n, c)
        bound = additive_lb_bound(n, c)
        achieved = adv.final_height
        ok = achieved >= bound
        summary = {
            "game": "additive", "n": n, "c": format_ratio(c),
            "steps": len(trace),
            "final_height": format_ratio(achieved),
            "backlog": format_ratio(trace.backlog),
            "bound": format_ratio(bound),
            "achieved_exceeds_bound": ok,
        }
    else:  # flushing
        summary_run = simulate_flushing_lb(n, c)
        gens = [co.generation for co in summary_run.cohorts]
        top = max(gens)
        ok = all(ph.timing_ok for ph in summary_run.phases) and all(
            co.height == c**co.generation for co in summary_run.cohorts
        )
        summary = {
            "game": "flushing", "n": n, "c": format_ratio(c),
            "steps": summary_run.total_steps,
            "generations": top,
            "cohorts": [
                {"count": co.count, "height": format_ratio(co.height)}
                for co in summary_run.cohorts
            ],
            "backlog": format_ratio(summary_run.backlog),
            "cups_needed_final": flushing_cups_needed(c, top),
            "structure_ok": ok,
        }
    _emit(summary)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_verify(args) -> int:
    report = run_suite(args.suite)
    print(report.summary())
    return EXIT_OK if report.ok else EXIT_CHECK_FAILED


def cmd_search(args) -> int:
    config = SearchConfig(
        family=args.family,
        n_slow=(args.n_slow_min, args.n_slow_max),
        seed=args.seed,
        iterations=args.iters,
        perturbation_sigma=args.sigma,
        horizon=args.horizon,
    )
    if args.start:
        start = _load_any_instance(args.start)
        results = [hill_climb(start, config)]
    else:
        results = search_seeds(config, range(args.seed, args.seed + args.seeds))
    for r in results:
        replay_verify(r)
    if args.out:
        append_results(results, args.out)
    best = max(results, key=lambda r: r.backlog)
    _emit(
        {
            "results": len(results),
            "best_backlog": format_ratio(best.backlog),
            "best_backlog_step": best.backlog_step,
            "best_instance": best.instance.name,
            "best_seed": best.seed,
            "counterexamples": sum(1 for r in results if r.exceeds_two),
            "flagged_COUNTEREXAMPLE": best.backlog > 2,
            "archive": str(args.out) if args.out else None,
        }
    )
    return EXIT_OK


def cmd_instances(args) -> int:
    if args.action == "list":
        out = []
        for name in sorted(BUNDLED):
            inst = get_instance(name)
            out.append(
                {
                    "name": name,
                    "n": inst.n,
                    "rate_sum": format_ratio(inst.rate_sum()),
                    "expected_backlog": format_ratio(inst.expected_backlog),
                    "expected_backlog_step": inst.expected_backlog_step,
                }
            )
        _emit({"instances": out})
        return EXIT_OK
    # export
    inst = get_instance(args.name)
    if args.out:
        save_instance(inst, args.out)
        _emit({"exported": args.name, "path": str(args.out)})
    else:
        _emit(instance_to_json(inst))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cupgames",
        description="Exact cup-game and bamboo-trimming simulator and verifier",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate a player on a fixed-rate instance")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--instance", help="bundled name (warmup, main) or instance file")
    p.add_argument("--player", default="greedy", choices=["greedy", "deadline", "hybrid"])
    p.add_argument("--steps", type=int)
    p.add_argument("--out", help="write the full JSON-lines trace here")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("lowerbound", help="run a constructive lower-bound adversary")
    p.add_argument("--game", required=True, choices=["multiplicative", "additive", "flushing"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--c", required=True, help='error parameter, e.g. "2" or "4/3"')
    p.set_defaults(fn=cmd_lowerbound)

    p = sub.add_parser("verify", help="run a named verification suite")
    p.add_argument("--suite", required=True, choices=sorted(SUITES))
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("search", help="randomized counterexample search")
    p.add_argument("--family", default="steep2", choices=["steep2", "steep3"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", type=int, default=1, help="number of fresh-draw seeds")
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--sigma", type=float, default=1e-4)
    p.add_argument("--horizon", type=int, default=40000)
    p.add_argument("--n-slow-min", type=int, default=1200)
    p.add_argument("--n-slow-max", type=int, default=3000)
    p.add_argument("--start", help="hill-climb from this instance instead of fresh draws")
    p.add_argument("--out", help="append replay-verified results to this JSON-lines archive")
    p.set_defaults(fn=cmd_search)

    p = sub.add_parser("instances", help="list or export bundled instances")
    p.add_argument("action", choices=["list", "export"])
    p.add_argument("name", nargs="?", help="instance name (for export)")
    p.add_argument("--out", help="write the instance JSON here")
    p.set_defaults(fn=cmd_instances)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already; normalize other codes
        return EXIT_USAGE if exc.code not in (0,) else 0
    try:
        return args.fn(args)
    except (CupGameError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
