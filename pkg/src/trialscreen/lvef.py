"""Ejection-fraction extraction from echo and note text.

Two regex stages. Selectors 1-4 pick sentences that can carry an LVEF;
value patterns then read a range ("40 to 45%", "40%-45%"), a single
percentage ("55%", "37.5 %") or a qualitative description ("severely
reduced"), in that order of preference, one mention per sentence.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import date
from enum import Enum
from typing import Optional, Union

from .records import PatientRecord, ReportKind
from .text import Sentence, split_sentences

DEFAULT_THRESHOLD = 45.0


class QualCategory(str, Enum):
    NORMAL = "normal"
    LOW_NORMAL = "low_normal"
    PRESERVED = "preserved"
    MILDLY_REDUCED = "mildly_reduced"
    MODERATELY_REDUCED = "moderately_reduced"
    SEVERELY_REDUCED = "severely_reduced"


# higher is better pumping function; low_normal and preserved tie
QUAL_RANK = {
    QualCategory.NORMAL: 4,
    QualCategory.LOW_NORMAL: 3,
    QualCategory.PRESERVED: 3,
    QualCategory.MILDLY_REDUCED: 2,
    QualCategory.MODERATELY_REDUCED: 1,
    QualCategory.SEVERELY_REDUCED: 0,
}


class Form(str, Enum):
    NUMERIC = "numeric"
    RANGE = "range"
    QUALITATIVE = "qualitative"


class Relation(str, Enum):
    AT_OR_ABOVE = "at_or_above"
    BELOW = "below"
    STRADDLES = "straddles"
    INDETERMINATE = "indeterminate"


DESCRIPTORS = {
    "severely globally reduced": QualCategory.SEVERELY_REDUCED,
    "severely reduced": QualCategory.SEVERELY_REDUCED,
    "severely decreased": QualCategory.SEVERELY_REDUCED,
    "severely depressed": QualCategory.SEVERELY_REDUCED,
    "markedly reduced": QualCategory.SEVERELY_REDUCED,
    "markedly decreased": QualCategory.SEVERELY_REDUCED,
    "severe": QualCategory.SEVERELY_REDUCED,
    "moderately reduced": QualCategory.MODERATELY_REDUCED,
    "moderately decreased": QualCategory.MODERATELY_REDUCED,
    "moderately depressed": QualCategory.MODERATELY_REDUCED,
    "mildly reduced": QualCategory.MILDLY_REDUCED,
    "mildly decreased": QualCategory.MILDLY_REDUCED,
    "mildly depressed": QualCategory.MILDLY_REDUCED,
    "low normal": QualCategory.LOW_NORMAL,
    "low-normal": QualCategory.LOW_NORMAL,
    "well preserved": QualCategory.PRESERVED,
    "preserved": QualCategory.PRESERVED,
    "normal global": QualCategory.NORMAL,
    "normal": QualCategory.NORMAL,
}

DYSFUNCTION_SEVERITY = {
    "moderate": QualCategory.MODERATELY_REDUCED,
    "marked": QualCategory.SEVERELY_REDUCED,
    "severe": QualCategory.SEVERELY_REDUCED,
}

EF_SYNONYMS = [
    "left ventricular ejection fraction",
    "left ventricle ejection fraction",
    "lv ejection fraction",
    "lvef",
    "ejection fraction",
    "ef",
]

LV_FUNCTION_SYNONYMS = [
    "left ventricular systolic function",
    "left ventricular function",
    "systolic function of the left ventricle",
    "lv systolic function",
    "lv function",
    "left ventricular ejection fraction",
    "lv ejection fraction",
    "lvef",
    "ejection fraction",
    "left ventricle",
]

LV_DYSFUNCTION = [
    "left ventricular systolic dysfunction",
    "left ventricular dysfunction",
    "lv systolic dysfunction",
]


def _alt(words) -> str:
    parts = sorted(words, key=len, reverse=True)
    return "|".join(r"\s+".join(re.escape(w) for w in p.split()) for p in parts)


_NOT_RIGHT = r"(?<!right ventricular )(?<!rv )"
_NUM = r"(?<![\w.])\d+(?:\.\d+)?"
_DESC = rf"(?<!\w)(?P<desc>{_alt(DESCRIPTORS)})(?!\w)"

# row 1: EF synonym, then within the sentence a number and "%"
SELECT_NUMERIC = re.compile(rf"{_NOT_RIGHT}(?<!\w)(?:{_alt(EF_SYNONYMS)})(?!\w)[^%]*?{_NUM}\s*%", re.I)
# row 2: LV-function phrase followed by a qualitative descriptor (no clause break between)
SELECT_FUNCTION_DESC = re.compile(rf"{_NOT_RIGHT}(?<!\w)(?:{_alt(LV_FUNCTION_SYNONYMS)})(?!\w)[^,;%]*?{_DESC}", re.I)
# row 3: descriptor directly before an LV-function phrase ("normal global LV function")
SELECT_DESC_FUNCTION = re.compile(
    rf"{_DESC}\s+(?:(?:global|overall)\s+)?(?:{_alt(w for w in LV_FUNCTION_SYNONYMS if w != 'left ventricle')})(?!\w)",
    re.I)
# row 4: graded LV dysfunction
SELECT_DYSFUNCTION = re.compile(
    rf"(?<!\w)(?P<desc>{_alt(DYSFUNCTION_SEVERITY)})\s+(?:{_alt(LV_DYSFUNCTION)})(?!\w)", re.I)

SELECTORS = (SELECT_NUMERIC, SELECT_FUNCTION_DESC, SELECT_DESC_FUNCTION, SELECT_DYSFUNCTION)

# row 5: range, either order, "%" after the second number (optionally after both)
VALUE_RANGE = re.compile(rf"({_NUM})\s*%?\s*(?:-|–|to)\s*({_NUM})\s*%", re.I)
# row 6: single percentage
VALUE_SINGLE = re.compile(rf"({_NUM})\s*%")
_RANGE_TAIL = re.compile(rf"\s*(?:-|–|to)\s*{_NUM}\s*%", re.I)

Value = Union[float, tuple[float, float], QualCategory]


@dataclass(frozen=True)
class LvefMention:
    sentence: Sentence
    form: Form
    value: Value
    report_id: str = ""
    date: Optional[date] = None

    def value_str(self) -> str:
        if self.form is Form.RANGE:
            low, high = self.value
            return f"{low:g}-{high:g}"
        if self.form is Form.NUMERIC:
            return f"{self.value:g}"
        return self.value.value


@dataclass(frozen=True)
class LvefFinding:
    mention: LvefMention
    relation: Relation
    threshold: float = DEFAULT_THRESHOLD
    extraction_misses: int = 0


def select_lvef_sentences(text: str) -> list[Sentence]:
    return [s for s in split_sentences(text) if any(p.search(s.text) for p in SELECTORS)]


def _percent(raw: str) -> Optional[float]:
    value = float(raw)
    return value if 0.0 <= value <= 100.0 else None


def _qualitative(text: str) -> Optional[QualCategory]:
    best = None
    for pattern in SELECTORS[1:]:
        m = pattern.search(text)
        if m and (best is None or m.start("desc") < best.start("desc")):
            best = m
    if best is None:
        return None
    desc = " ".join(best.group("desc").lower().split())
    if best.re is SELECT_DYSFUNCTION:
        return DYSFUNCTION_SEVERITY[desc]
    return DESCRIPTORS[desc]


def extract_lvef_value(sentence: Sentence | str, report_id: str = "",
                       when: Optional[date] = None) -> Optional[LvefMention]:
    """Read one LVEF value from a selected sentence.

    Returns None for an extraction miss: nothing readable, or a percentage
    outside 0-100.
    """
    if isinstance(sentence, str):
        sentence = Sentence(0, len(sentence), sentence)
    text = sentence.text

    m = SELECT_NUMERIC.search(text)
    if m:
        end = m.end()
        tail = _RANGE_TAIL.match(text, end)
        if tail:
            end = tail.end()
        region = text[m.start():end]
        r = VALUE_RANGE.search(region)
        if r:
            a, b = _percent(r.group(1)), _percent(r.group(2))
            if a is None or b is None:
                return None
            return LvefMention(sentence, Form.RANGE, (min(a, b), max(a, b)), report_id, when)
        s = VALUE_SINGLE.search(region)
        value = _percent(s.group(1))
        if value is None:
            return None
        return LvefMention(sentence, Form.NUMERIC, value, report_id, when)

    category = _qualitative(text)
    if category is None:
        return None
    return LvefMention(sentence, Form.QUALITATIVE, category, report_id, when)


def relation_to_threshold(mention: LvefMention, threshold: float = DEFAULT_THRESHOLD) -> Relation:
    if mention.form is Form.NUMERIC:
        return Relation.AT_OR_ABOVE if mention.value >= threshold else Relation.BELOW
    if mention.form is Form.RANGE:
        low, high = mention.value
        if low >= threshold:
            return Relation.AT_OR_ABOVE
        if high < threshold:
            return Relation.BELOW
        return Relation.STRADDLES
    rank = QUAL_RANK[mention.value]
    if rank >= QUAL_RANK[QualCategory.PRESERVED]:
        return Relation.AT_OR_ABOVE
    if rank <= QUAL_RANK[QualCategory.MODERATELY_REDUCED]:
        return Relation.BELOW
    return Relation.INDETERMINATE


def report_mentions(text: str, report_id: str = "", when: Optional[date] = None) -> tuple[list[LvefMention], int]:
    """All mentions in one report text plus the number of extraction misses."""
    mentions, misses = [], 0
    for sentence in select_lvef_sentences(text):
        mention = extract_lvef_value(sentence, report_id, when)
        if mention is None:
            misses += 1
        else:
            mentions.append(mention)
    return mentions, misses


def resolve_lvef(record: PatientRecord, threshold: float = DEFAULT_THRESHOLD) -> Optional[LvefFinding]:
    """One LVEF finding per patient from the most recent report that has one.

    Echo reports are searched first; encounter notes only when no echo
    yields a mention. Within the chosen report a numeric or range value wins
    over a qualitative one, then text order.
    """
    return resolve_with_misses(record, threshold)[0]


def resolve_with_misses(record: PatientRecord,
                        threshold: float = DEFAULT_THRESHOLD) -> tuple[Optional[LvefFinding], int]:
    misses = 0
    for kinds in ((ReportKind.ECHO,), (ReportKind.ENCOUNTER_NOTE,)):
        per_report = []
        for report in record.reports_of(kinds):
            mentions, missed = report_mentions(report.text, report.report_id, report.date)
            misses += missed
            if mentions:
                per_report.append((report, mentions))
        if per_report:
            report, mentions = max(per_report, key=lambda rm: (rm[0].date or date.min, rm[0].report_id))
            chosen = min(mentions, key=lambda m: (m.form is Form.QUALITATIVE, m.sentence.start))
            return LvefFinding(chosen, relation_to_threshold(chosen, threshold), threshold, misses), misses
    return None, misses
