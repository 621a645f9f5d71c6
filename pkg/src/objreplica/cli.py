"""Command line driver.

Exit codes: 0 success, 1 I/O error, 2 malformed input, 64 usage error.
Artifacts go to stdout (or ``--out``); diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import secrets
import sys
from typing import Optional, Sequence

from .analyzer import FORMATS, emit, rank
from .oracle import GroundTruthReport, LabelMismatch, ground_truth
from .pipeline import compare, summary_json
from .profile import ConfigConflict, Profile, merge_profiles
from .replay import DetectConfig, detect
from .theory import REPORT_THRESHOLD, AlphaOutOfRange, TooFewObjects, bound_interval
from .trace import InvariantViolation, MalformedRecord, dump_trace, load_trace, validate_trace
from .workload import (ORDERS, ConfigInvalid, GenConfig, example1_trace, false_positive_corpus,
                       generate)

EXIT_OK, EXIT_IO, EXIT_MALFORMED, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _int_or_inf(text: str) -> Optional[int]:
    if text.lower() in ("inf", "unbounded", "none"):
        return None
    return _positive_int(text)


def _fraction(lo: float, hi: float, hi_open: bool):
    def parse(text: str) -> float:
        try:
            v = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
        if not (lo <= v and (v < hi if hi_open else v <= hi)):
            raise argparse.ArgumentTypeError(f"{v} outside [{lo}, {hi}{')' if hi_open else ']'}")
        return v
    return parse


def _seed(text: str) -> int:
    if text == "random":
        s = secrets.randbits(32)
        print(f"seed: {s}", file=sys.stderr)
        return s
    return _nonneg_int(text)


def _groups(text: str) -> tuple[int, ...]:
    try:
        g = tuple(int(x) for x in text.replace(" ", "").split(",") if x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad group list {text!r}") from None
    if not g or min(g) < 1:
        raise argparse.ArgumentTypeError("group sizes must be positive")
    return g


def _write(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _detect_config(args) -> DetectConfig:
    return DetectConfig(period=args.period, jitter=args.jitter, seed=args.seed,
                        watchpoints=args.watchpoints, queue_capacity=args.queue_capacity)


def _gen_config(args) -> GenConfig:
    return GenConfig(contexts=args.contexts, objects_per_context=args.objects,
                     group_sizes=args.groups, object_size=args.object_size,
                     reads_per_object=args.reads, writes_per_object=args.writes,
                     threads=args.threads, values=args.values, order=args.order,
                     seed=args.seed)


# -- subcommands ------------------------------------------------------------

def cmd_gen(args) -> int:
    if args.scenario == "example1":
        events = example1_trace()
    elif args.scenario == "corpus":
        events, _ = false_positive_corpus(args.seed)
    else:
        events = generate(_gen_config(args))
    if args.out and args.out != "-":
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            dump_trace(events, fh)
    else:
        dump_trace(events, sys.stdout)
    return EXIT_OK


def cmd_detect(args) -> int:
    events = load_trace(args.input, args.skip_budget)
    if args.validate:
        stats = validate_trace(events)
        for d in stats.diagnostics:
            print(f"warning: {d}", file=sys.stderr)
    prof = detect(events, _detect_config(args))
    _write(prof.to_json(), args.out)
    return EXIT_OK


def cmd_oracle(args) -> int:
    events = load_trace(args.input, args.skip_budget)
    rep = ground_truth(events, check_labels=not args.no_label_check)
    _write(rep.to_json(), args.out)
    return EXIT_OK


def cmd_merge(args) -> int:
    merged = merge_profiles(Profile.load(p) for p in args.inputs)
    _write(merged.to_json(), args.out)
    return EXIT_OK


def cmd_report(args) -> int:
    prof = Profile.load(args.input)
    source = GroundTruthReport.load(args.alpha_from).alpha_by_path() if args.alpha_from else None
    report = rank(prof, args.threshold, alpha_source=source, alpha_default=args.alpha)
    if not report.contexts:
        print("notice: no comparisons recorded; report is empty", file=sys.stderr)
    _write(emit(report, args.format), args.out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    try:
        b = bound_interval(args.theta, args.alpha, args.x)
    except (AlphaOutOfRange, TooFewObjects, ValueError) as exc:
        raise UsageError(str(exc)) from None
    if b.omega_clamped:
        print("warning: theta < alpha, omega clamped to 0", file=sys.stderr)
    if b.gamma_capped:
        print(f"warning: gamma {b.gamma_raw:.6g} capped at 1", file=sys.stderr)
    lines = [f"omega {b.omega:.6g}", f"gamma {b.gamma:.6g}", f"A {b.A:.6g}"]
    if args.debug:
        lines += [f"B {b.B:.6g}", f"C {b.C:.6g}", f"gamma_raw {b.gamma_raw:.6g}"]
    _write("\n".join(lines) + "\n", None)
    return EXIT_OK


def cmd_e2e(args) -> int:
    gen = _gen_config(args)
    trace = generate(gen)
    prof = detect(trace, _detect_config(args))
    truth = ground_truth(trace)
    report = rank(prof, args.threshold, alpha_source=truth.alpha_by_path())
    summary = summary_json(compare(prof, truth))
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        with open(os.path.join(args.out_dir, "trace.jsonl"), "w", encoding="utf-8", newline="\n") as fh:
            dump_trace(trace, fh)
        outputs = {"profile.json": prof.to_json(), "oracle.json": truth.to_json(),
                   "report.json": emit(report, "json"), "report.folded": emit(report, "folded"),
                   "summary.json": summary}
        for name, text in outputs.items():
            _write(text, os.path.join(args.out_dir, name))
    _write(summary, None)
    return EXIT_OK


# -- parser -----------------------------------------------------------------

def _add_gen_args(p) -> None:
    p.add_argument("--contexts", type=_positive_int, default=4)
    p.add_argument("--objects", type=_positive_int, default=100, help="objects per context")
    p.add_argument("--groups", type=_groups, default=None,
                   help="comma-separated identical-group sizes, e.g. 60,40")
    p.add_argument("--object-size", type=_positive_int, default=64)
    p.add_argument("--reads", type=_nonneg_int, default=None, help="loads per object")
    p.add_argument("--writes", type=_nonneg_int, default=None, help="stores per object")
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--values", default="distinct", help="distinct | near | correlated:P")
    p.add_argument("--order", choices=ORDERS, default="mixed")


def _add_detect_args(p) -> None:
    p.add_argument("--period", type=_positive_int, default=DetectConfig.period)
    p.add_argument("--jitter", type=_fraction(0.0, 1.0, True), default=DetectConfig.jitter)
    p.add_argument("--watchpoints", type=_int_or_inf, default=DetectConfig.watchpoints,
                   help="slot count W, or 'inf'")
    p.add_argument("--queue-capacity", type=_int_or_inf, default=DetectConfig.queue_capacity,
                   help="per-context queue length, or 'inf'")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="objreplica", description="Sampled object-replica detection on traces.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="write a synthetic trace")
    p.add_argument("--scenario", choices=("config", "example1", "corpus"), default="config")
    _add_gen_args(p)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("detect", help="replay a trace and write a profile")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default=None)
    _add_detect_args(p)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--skip-budget", type=_nonneg_int, default=0,
                   help="malformed records tolerated before aborting")
    p.add_argument("--validate", action="store_true", help="report trace diagnostics on stderr")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("oracle", help="exhaustive ground truth for a trace")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--skip-budget", type=_nonneg_int, default=0)
    p.add_argument("--no-label-check", action="store_true")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("merge", help="sum several profiles")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("report", help="rank a profile")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=sorted(FORMATS), default="text")
    p.add_argument("--threshold", type=_fraction(0.0, 1.0, False), default=REPORT_THRESHOLD)
    p.add_argument("--alpha-from", default=None, help="oracle report supplying per-context alpha")
    p.add_argument("--alpha", type=_fraction(0.0, 1.0, True), default=0.0,
                   help="alpha for contexts the oracle does not cover (0 is optimistic)")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("bounds", help="omega, gamma and A for given theta, alpha, X")
    p.add_argument("--theta", type=_fraction(0.0, 1.0, False), required=True)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--debug", action="store_true", help="also print B and C")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("e2e", help="generate, detect, oracle, report and compare")
    _add_gen_args(p)
    _add_detect_args(p)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--threshold", type=_fraction(0.0, 1.0, False), default=REPORT_THRESHOLD)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_e2e)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"objreplica: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigInvalid, ConfigConflict) as exc:
        print(f"objreplica: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MalformedRecord, InvariantViolation, LabelMismatch, json.JSONDecodeError,
            KeyError, ValueError) as exc:
        print(f"objreplica: malformed input: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except OSError as exc:
        print(f"objreplica: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
