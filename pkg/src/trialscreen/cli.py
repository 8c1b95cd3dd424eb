"""``trialscreen`` command line.

Exit codes: 0 success, 1 fatal configuration or input error, 2 criteria
still carry placeholder thresholds.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from collections import Counter
from pathlib import Path

from .engine import CriteriaError, PlaceholderError, ScreeningDecision, Verdict, default_criteria_path, parse_criteria
from .estimator import Prescreener
from .evaluation import GoldError, compute_metrics, load_gold, score_decisions, tally_discards
from .lexicons import LexiconError, load_lexicons
from .lvef import report_mentions
from .records import RecordError, load_records
from .terms import assert_status, find_mentions, generate_term_patterns

log = logging.getLogger("trialscreen")

EXIT_OK, EXIT_ERROR, EXIT_PLACEHOLDERS = 0, 1, 2
FATAL = (RecordError, LexiconError, CriteriaError, GoldError, OSError, ValueError, KeyError)


def _write_decisions(decisions, path: Path, fmt: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if fmt == "jsonl":
            for d in decisions:
                fh.write(json.dumps(d.to_dict()) + "\n")
            return
        writer = csv.writer(fh)
        writer.writerow(["patient_id", "verdict", "first_discard_reason", "warnings"])
        for d in decisions:
            writer.writerow([d.patient_id, d.verdict.value, d.first_discard_reason or "", " | ".join(d.warnings)])


def read_decisions(path: str | Path) -> list[ScreeningDecision]:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".csv":
        rows = csv.DictReader(text.splitlines())
        return [ScreeningDecision(r["patient_id"], Verdict(r["verdict"]), (), r["first_discard_reason"] or None)
                for r in rows]
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.strip():
            try:
                out.append(ScreeningDecision.from_dict(json.loads(line)))
            except (ValueError, KeyError) as exc:
                raise ValueError(f"{path}:{lineno}: bad decision record: {exc}") from exc
    return out


def cmd_prescreen(args) -> int:
    screener = Prescreener(criteria=args.criteria, lexicons=args.lexicons, as_of=args.as_of,
                           allow_placeholders=args.allow_placeholders, n_jobs=args.jobs)
    try:
        screener.fit()
    except PlaceholderError as exc:
        print("error: criteria contain unconfirmed placeholder thresholds:", file=sys.stderr)
        for p in exc.placeholders:
            print(f"  {p}", file=sys.stderr)
        print("confirm them in the criteria file or pass --allow-placeholders", file=sys.stderr)
        return EXIT_PLACEHOLDERS

    cohort = load_records(args.records)
    for issue in cohort.issues:
        log.info("%s %s %s: %s", issue.patient_id, issue.report_id or "-", issue.code.value, issue.message)
    decisions = sorted(screener.screen(cohort), key=lambda d: d.patient_id)
    _write_decisions(decisions, Path(args.out), args.format)

    verdicts = Counter(d.verdict.value for d in decisions)
    print(f"{len(decisions)} patients: " + ", ".join(f"{v} {verdicts.get(v.value, 0)}" for v in
                                                      (Verdict.ELIGIBLE, Verdict.NEEDS_REVIEW, Verdict.EXCLUDED)),
          file=sys.stderr)
    if cohort.issues:
        codes = Counter(i.code.value for i in cohort.issues)
        print("data-quality issues: " + ", ".join(f"{c} {n}" for c, n in sorted(codes.items())), file=sys.stderr)
    return EXIT_OK


def _fmt(value) -> str:
    return "n/a" if value is None else f"{float(value):.4f}"


def cmd_evaluate(args) -> int:
    decisions = read_decisions(args.decisions)
    cm = score_decisions(decisions, load_gold(args.gold))
    metrics = compute_metrics(cm)
    print(f"tp={cm.tp} fp={cm.fp} fn={cm.fn} tn={cm.tn}")
    print(f"recall={_fmt(metrics.recall)} precision={_fmt(metrics.precision)} f1={_fmt(metrics.f1)}")
    if args.criteria:
        print()
        print(tally_discards(decisions, parse_criteria(args.criteria)).format())
    return EXIT_OK


def cmd_extract(args) -> int:
    text = Path(args.text).read_text(encoding="utf-8")
    if args.target == "lvef":
        mentions, misses = report_mentions(text)
        for m in mentions:
            print(f"{m.form.value}\t{m.value_str()}\t{m.sentence.text}")
        if misses:
            print(f"{misses} selected sentence(s) without a readable value", file=sys.stderr)
        return EXIT_OK
    lex = load_lexicons(args.lexicons)
    patterns = generate_term_patterns(args.element, lex.terms)
    for m in find_mentions(text, patterns, args.element):
        print(f"{m.surface}\t{assert_status(m, lex.triggers).value}\t{m.start}-{m.end}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage errors are fatal (1); exit status 2 is reserved for placeholders
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trialscreen", description="Rule-based clinical trial prescreening")
    parser.add_argument("-v", "--verbose", action="store_true", help="log data-quality issues")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prescreen", help="screen a cohort file")
    p.add_argument("--records", required=True, help="line-delimited JSON cohort")
    p.add_argument("--criteria", default=None, help=f"criteria YAML (default: {default_criteria_path().name})")
    p.add_argument("--lexicons", default=None, help="lexicon directory (default: shipped lexicons)")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--as-of", default=None, help="reference date for active medications (YYYY-MM-DD)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--allow-placeholders", action="store_true")
    p.set_defaults(func=cmd_prescreen)

    p = sub.add_parser("evaluate", help="score decisions against gold labels")
    p.add_argument("--decisions", required=True)
    p.add_argument("--gold", required=True, help="lines 'patient_id<TAB>included|excluded'")
    p.add_argument("--criteria", default=None, help="also print the per-criterion discard table")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("extract", help="debug one extractor on a text file")
    p.add_argument("target", choices=("lvef", "term"))
    p.add_argument("--text", required=True)
    p.add_argument("--element", help="element name (term only)")
    p.add_argument("--lexicons", default=None)
    p.set_defaults(func=cmd_extract)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.command == "extract" and args.target == "term" and not args.element:
        parser.error("extract term needs --element")
    try:
        return args.func(args)
    except FATAL as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
