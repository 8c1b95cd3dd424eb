"""Screening metrics against gold labels and per-criterion discard tallies."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Optional

from .engine import CriteriaSet, ScreeningDecision

INCLUDED = "included"
EXCLUDED = "excluded"


class GoldError(Exception):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class Metrics:
    """Exact ratios; None where the denominator is zero."""

    recall: Optional[Fraction]
    precision: Optional[Fraction]
    f1: Optional[Fraction]

    def rounded(self, places: int = 4) -> dict[str, Optional[float]]:
        return {name: None if v is None else round(float(v), places)
                for name, v in (("recall", self.recall), ("precision", self.precision), ("f1", self.f1))}


def compute_metrics(cm: ConfusionMatrix) -> Metrics:
    recall = Fraction(cm.tp, cm.tp + cm.fn) if cm.tp + cm.fn else None
    precision = Fraction(cm.tp, cm.tp + cm.fp) if cm.tp + cm.fp else None
    if recall is None or precision is None or recall + precision == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return Metrics(recall, precision, f1)


def score_decisions(decisions: Iterable[ScreeningDecision], gold: Mapping[str, str]) -> ConfusionMatrix:
    """Confusion matrix with "screened in" (eligible or needs_review) as positive."""
    decisions = list(decisions)
    missing = sorted(d.patient_id for d in decisions if d.patient_id not in gold)
    if missing:
        raise GoldError(f"no gold label for patient(s): {', '.join(missing)}")
    tp = fp = fn = tn = 0
    for d in decisions:
        truth = gold[d.patient_id] == INCLUDED
        if d.screened_in:
            tp, fp = (tp + 1, fp) if truth else (tp, fp + 1)
        else:
            fn, tn = (fn + 1, tn) if truth else (fn, tn + 1)
    return ConfusionMatrix(tp, fp, fn, tn)


def load_gold(path: str | Path) -> dict[str, str]:
    """Read ``patient_id<TAB>included|excluded`` lines."""
    gold = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.rstrip("\n").split("\t")
        if len(parts) != 2 or parts[1].strip() not in (INCLUDED, EXCLUDED):
            raise GoldError(f"{path}:{lineno}: expected 'patient_id<TAB>included|excluded'")
        gold[parts[0].strip()] = parts[1].strip()
    return gold


@dataclass(frozen=True)
class DiscardRow:
    criterion_id: str
    label: str
    sources: tuple[str, ...]
    count: int


@dataclass(frozen=True)
class DiscardTable:
    rows: tuple[DiscardRow, ...]

    @property
    def total(self) -> int:
        return sum(r.count for r in self.rows)

    def counts(self) -> dict[str, int]:
        return {r.criterion_id: r.count for r in self.rows}

    def format(self) -> str:
        width = max([len(r.label) for r in self.rows] + [9])
        lines = [f"{'criterion':<{width}}  {'report types':<40}  discarded"]
        for r in self.rows:
            lines.append(f"{r.label:<{width}}  {'/'.join(r.sources):<40}  {r.count}")
        lines.append(f"{'total':<{width}}  {'':<40}  {self.total}")
        return "\n".join(lines)


def tally_discards(decisions: Iterable[ScreeningDecision], criteria: CriteriaSet) -> DiscardTable:
    counts = {c.id: 0 for c in criteria}
    for d in decisions:
        reason = d.first_discard_reason
        if reason is None:
            continue
        if reason not in counts:
            raise ValueError(f"patient {d.patient_id}: discard reason {reason!r} is not in the criteria set")
        counts[reason] += 1
    return DiscardTable(tuple(
        DiscardRow(c.id, c.label or c.id, tuple(k.value for k in c.sources), counts[c.id])
        for c in criteria))
