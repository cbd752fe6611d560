"""Command line entry point: ``gradedeval {eval,condense,gains}``.

Exit status is 0 on success, 1 on invalid input, 2 on I/O failure.
"""

from __future__ import annotations

import argparse
import sys
import warnings

from . import adhoc, diversity
from .corpus import load, parse_qrels, parse_run, read_text, serialize_run
from .evaluation import R0_EXCLUDE, R0_ZERO, EvalConfig, condense, evaluate, parse_labels, show_gains
from .gains import DEFAULT_UPGRADE_P

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


def _cutoffs(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad cutoff list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gradedeval", description="Graded-relevance evaluation of ranked runs.")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", help="score a run, printing per-topic and mean values")
    ev.add_argument("--qrels", required=True)
    ev.add_argument("--run", required=True)
    ev.add_argument("--intents", help="topic intent prob [inf|nav]")
    ev.add_argument("--verticals", help="topic intent vertical prob")
    ev.add_argument("--submap", help="topic subtopic intent (for V-score / QU-score)")
    ev.add_argument("--classes", help="topic class-id doc equivalence classes")
    ev.add_argument("--gains", default="linear", help="linear, quadratic, or level:gain list (default linear)")
    ev.add_argument("--measures", nargs="+", default=["ap", "q", "ms-ndcg@10", "nerr@10"],
                    help="e.g. ap q@10 ms-ndcg@10 nerr@10 d#-ndcg@10")
    ev.add_argument("--cutoffs", type=_cutoffs, default=[], help="cutoffs applied to measures given without @l")
    ev.add_argument("--beta", type=float, default=adhoc.DEFAULT_BETA)
    ev.add_argument("--gamma", type=float, default=diversity.DEFAULT_GAMMA)
    ev.add_argument("--alpha", type=float, default=diversity.DEFAULT_ALPHA,
                    help="H-measure weight; validated here, H-measure itself is library-only")
    ev.add_argument("--lambda", dest="lam", type=float, default=diversity.DEFAULT_LAMBDA)
    ev.add_argument("--log-base", type=float, default=adhoc.DEFAULT_LOG_BASE, help="original nDCG log base b")
    ev.add_argument("--err-base", type=float, default=adhoc.DEFAULT_ERR_BASE)
    ev.add_argument("--vertical-gain", type=float, default=diversity.DEFAULT_VERTICAL_GAIN)
    ev.add_argument("--condensed", action="store_true", help="drop unjudged documents before scoring")
    ev.add_argument("--r0-policy", choices=[R0_ZERO, R0_EXCLUDE], default=R0_ZERO)
    ev.add_argument("--no-missing-zero", dest="missing_zero", action="store_false",
                    help="skip qrels topics absent from the run instead of scoring them 0")
    ev.add_argument("--threads", type=int, default=1)

    co = sub.add_parser("condense", help="write the run with unjudged documents removed")
    co.add_argument("--qrels", required=True)
    co.add_argument("--run", required=True)

    ga = sub.add_parser("gains", help="print a gain table and aggregated assessor gains")
    ga.add_argument("--gains", default="linear")
    ga.add_argument("--qrels", help="take the maximum level from these qrels")
    ga.add_argument("--max-level", type=int, default=None)
    ga.add_argument("--labels", help="topic doc score [score ...] per-assessor scores")
    ga.add_argument("--unanimity-p", type=float, default=DEFAULT_UPGRADE_P)
    ga.add_argument("--dmax", type=float, default=None, help="highest possible assessor score")
    return parser


def _run_eval(args) -> None:
    config = EvalConfig(
        qrels=args.qrels, run=args.run, intents=args.intents, verticals=args.verticals,
        submap=args.submap, classes=args.classes, gains=args.gains, measures=args.measures,
        cutoffs=args.cutoffs, beta=args.beta, gamma=args.gamma, alpha=args.alpha, lam=args.lam,
        log_base=args.log_base, err_base=args.err_base,
        vertical_gain=args.vertical_gain, condensed=args.condensed, r0_policy=args.r0_policy,
        missing_zero=args.missing_zero, threads=args.threads,
    )
    report = evaluate(config)
    sys.stdout.write(report.format())
    for message in report.warnings:
        print(f"warning: {message}", file=sys.stderr)
    if report.warnings:
        print(f"{len(report.warnings)} warning(s); {report.n_topics} topic(s) evaluated", file=sys.stderr)


def _run_condense(args) -> None:
    qrels = load(parse_qrels, args.qrels)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        run = load(parse_run, args.run)
    notes: list[str] = []
    sys.stdout.write(serialize_run(condense(run, qrels, notes)))
    for note in notes:
        print(f"warning: {note}", file=sys.stderr)


def _run_gains(args) -> None:
    max_level = args.max_level
    if args.qrels:
        max_level = load(parse_qrels, args.qrels).max_level
    if max_level is None:
        max_level = 2
    labels = parse_labels(read_text(args.labels)) if args.labels else ()
    report = show_gains(args.gains, max_level, labels, args.unanimity_p, args.dmax)
    sys.stdout.write(report.format())


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"eval": _run_eval, "condense": _run_condense, "gains": _run_gains}[args.command]
    try:
        handler(args)
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
