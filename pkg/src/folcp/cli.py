"""Command-line front end: solve queries, certify inference operators,
run the soundness and preservation suites, and replay the worked examples.
"""

from __future__ import annotations

import argparse
import json
import sys

from .algebra import (
    Algebra,
    FiniteAlgebra,
    herbrand_algebra,
    int_algebra,
    parse_algebra_spec,
)
from .infer import build_pipeline, PipelineError
from .lawcheck import (
    GenParams,
    certification_suite,
    preservation_suite,
    preservation_switch_report,
    quadratic_slice_reports,
    reports_to_records,
    soundness_suite,
)
from .oracle import FiniteDecider, OracleBudget, syntactic_decider
from .semantics import EvalConfig, EvalLimits, answers, sem_eval
from .state import EMPTY_CSP, EMPTY_SUBST, Pair, StateSet, singleton
from .syntax import FolcpError, FreshSupply, ParseError, parse_formula

EXIT_OK = 0
EXIT_NO_ANSWER = 1
EXIT_ERROR_STATE = 2
EXIT_USAGE = 3


def _load_algebra(source: str) -> Algebra:
    if source == "int":
        return int_algebra()
    if source == "herbrand":
        return herbrand_algebra()
    with open(source, "r", encoding="utf-8") as handle:
        return parse_algebra_spec(handle.read())


def _decider_for(alg: Algebra):
    if alg.domain_enumerable:
        size = len(alg.enumerate_domain())
        return FiniteDecider(alg, OracleBudget(max_domain=max(4, size), max_free_vars=6))
    return syntactic_decider(alg)


def _write_report(path: str | None, reports) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(reports_to_records(reports), handle, indent=2)
            handle.write("\n")


def cmd_solve(args) -> int:
    try:
        alg = _load_algebra(args.algebra)
        decider = _decider_for(alg)
        op = build_pipeline(args.pipeline, alg, decider)
        if args.formula_file:
            with open(args.formula_file, "r", encoding="utf-8") as handle:
                text = handle.read()
        else:
            text = args.formula
        if text is None:
            print("solve needs --formula or --formula-file", file=sys.stderr)
            return EXIT_USAGE
        phi = parse_formula(text, alg)
    except (ParseError, PipelineError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    limits = EvalLimits(max_depth=args.max_depth, max_states=args.max_states)
    cfg = EvalConfig(alg, op, decider, FreshSupply(), limits)
    start = singleton(Pair(EMPTY_CSP, EMPTY_SUBST))
    outcome = sem_eval(cfg, StateSet.of(start), phi)
    if outcome.truncated:
        print("warning: evaluation truncated by limits", file=sys.stderr)
    result = answers(outcome, decider)
    for subst, csp in result.answers:
        print(f"<{csp} ; {subst}>")
    if result.error:
        print("error state produced", file=sys.stderr)
        if not result.answers:
            return EXIT_ERROR_STATE
    if not result.answers:
        print("no")
        return EXIT_NO_ANSWER
    return EXIT_OK


def cmd_check_infer(args) -> int:
    gen = GenParams(seed=args.seed)
    try:
        reports = certification_suite(args.pipeline, gen, trials=args.trials)
        if "quadratic" in args.pipeline:
            reports += quadratic_slice_reports(gen, trials=min(args.trials, 200))
    except (PipelineError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    for report in reports:
        print(report.summary_line())
        for ce in report.counterexamples:
            print(f"  counterexample input:  {ce.input}")
            print(f"  counterexample output: {ce.output}")
            print(f"  diagnosis: {ce.diagnosis}")
    _write_report(args.report, reports)
    blocking = [r for r in reports if not r.heuristic_only]
    return EXIT_OK if all(r.ok() for r in blocking) else EXIT_NO_ANSWER


def cmd_soundness(args) -> int:
    gen = GenParams(seed=args.seed)
    try:
        probe = build_pipeline(args.pipeline, int_algebra(), None)
    except PipelineError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    if probe.fixture:
        print("error: fixture operators are not certified for search",
              file=sys.stderr)
        return EXIT_USAGE
    reports = [
        soundness_suite(args.pipeline, gen, trials=args.trials),
        preservation_suite(args.pipeline, gen, trials=args.trials),
        preservation_switch_report(args.pipeline),
    ]
    for report in reports:
        print(report.summary_line())
        for ce in report.counterexamples:
            print(f"  counterexample input:  {ce.input}")
            print(f"  counterexample output: {ce.output}")
            print(f"  diagnosis: {ce.diagnosis}")
    _write_report(args.report, reports)
    failed = any(not r.ok() for r in reports)
    weak = any(r.skip_rate() > 0.20 for r in reports)
    if weak:
        print("error: skip rate above 20%, statistically weak run", file=sys.stderr)
    return EXIT_OK if not failed and not weak else EXIT_NO_ANSWER


def _demo_stage(label: str, states: StateSet) -> None:
    print(f"{label}: {states}")


def cmd_demo(args) -> int:
    name = args.name
    if name == "quadratic-split":
        alg = int_algebra()
        decider = _decider_for(alg)
        sets = [singleton(Pair(*_initial_store("x*x = 1", alg)))]
        _demo_stage("start", sets[0])
        for stage in ("quadratic", "split", "normalize"):
            op = build_pipeline(stage, alg, decider)
            sets.append(op.apply(sets[-1]))
            _demo_stage(stage, sets[-1])
        return EXIT_OK
    if name == "unify":
        alg = herbrand_algebra()
        decider = _decider_for(alg)
        start = singleton(Pair(*_initial_store("f(x) = f(y)", alg)))
        _demo_stage("start", start)
        op = build_pipeline("unify", alg, decider)
        _demo_stage("unify", op.apply(start))
        return EXIT_OK
    if name == "good-bad":
        alg = int_algebra()
        decider = _decider_for(alg)
        start = singleton(Pair(*_initial_store("in(x, {1, 2, 3, 4})", alg)))
        _demo_stage("start", start)
        op = build_pipeline("domsplit(rank=value,thr=3)", alg, decider)
        split = op.apply(start)
        _demo_stage("domsplit(rank=value,thr=3)", split)
        print("promising values are searched first")
        return EXIT_OK
    print(f"error: unknown demo {name!r}", file=sys.stderr)
    return EXIT_USAGE


def _initial_store(text: str, alg: Algebra):
    from .state import CSP

    phi = parse_formula(text, alg)
    return (CSP.of([phi]), EMPTY_SUBST)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="folcp",
        description="first-order logic over constraint states with "
                    "pluggable inference",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="evaluate a formula and print answers")
    solve.add_argument("--algebra", required=True,
                       help="'int', 'herbrand', or a path to an algebra spec")
    solve.add_argument("--pipeline", default="id", help="inference pipeline spec")
    solve.add_argument("--formula", help="formula text")
    solve.add_argument("--formula-file", help="path to a formula file")
    solve.add_argument("--max-depth", type=int, default=200)
    solve.add_argument("--max-states", type=int, default=2000)
    solve.set_defaults(fn=cmd_solve)

    check = sub.add_parser("check-infer", help="certify an inference pipeline")
    check.add_argument("--pipeline", required=True)
    check.add_argument("--trials", type=int, default=500)
    check.add_argument("--seed", type=int, default=0)
    check.add_argument("--report", help="write a machine-readable report file")
    check.set_defaults(fn=cmd_check_infer)

    sound = sub.add_parser("soundness", help="run soundness and preservation trials")
    sound.add_argument("--pipeline", default="normalize")
    sound.add_argument("--trials", type=int, default=1000)
    sound.add_argument("--seed", type=int, default=0)
    sound.add_argument("--report", help="write a machine-readable report file")
    sound.set_defaults(fn=cmd_soundness)

    demo = sub.add_parser("demo", help="replay a worked example")
    demo.add_argument("name", choices=["quadratic-split", "unify", "good-bad"],
                      help="which example to replay")
    demo.set_defaults(fn=cmd_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else 0
    try:
        return args.fn(args)
    except FolcpError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
