"""Term mention finding and assertion status (negated, family, ...).

Synonym lists become word-bounded regexes; each mention is then checked
against trigger phrases in its sentence, ConText style: a forward trigger
covers up to ``window`` tokens after it, a backward trigger the tokens
before it, and a scope terminator cuts either scope short.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from typing import Iterable, Optional

from .lexicons import Synonym, TermLexicon, TriggerCategory, TriggerLexicon
from .records import PatientRecord
from .text import Sentence, split_sentences, tokens

DEFAULT_WINDOW = 6


class AssertionStatus(str, Enum):
    AFFIRMED = "affirmed"
    NEGATED = "negated"
    FAMILY = "family"
    HISTORICAL = "historical"
    HYPOTHETICAL = "hypothetical"
    SCREENING = "screening"


# lower index wins when several triggers cover one mention
PRECEDENCE = (
    AssertionStatus.NEGATED,
    AssertionStatus.FAMILY,
    AssertionStatus.SCREENING,
    AssertionStatus.HYPOTHETICAL,
    AssertionStatus.HISTORICAL,
    AssertionStatus.AFFIRMED,
)

STATUS_OF = {
    TriggerCategory.NEGATION: AssertionStatus.NEGATED,
    TriggerCategory.EXPERIENCER_OTHER: AssertionStatus.FAMILY,
    TriggerCategory.HISTORICAL: AssertionStatus.HISTORICAL,
    TriggerCategory.HYPOTHETICAL: AssertionStatus.HYPOTHETICAL,
    TriggerCategory.SCREENING: AssertionStatus.SCREENING,
}

AMBIGUOUS_STATUSES = frozenset({AssertionStatus.SCREENING, AssertionStatus.HYPOTHETICAL})


@dataclass(frozen=True)
class TermPattern:
    synonym: Synonym
    regex: re.Pattern


@dataclass(frozen=True)
class Mention:
    element: str
    surface: str
    start: int
    end: int
    sentence: Sentence
    report_id: str = ""
    date: Optional[date] = None
    ambiguous_synonym: bool = False


@dataclass(frozen=True)
class PresenceFinding:
    element: str
    present: bool
    ambiguous: bool
    supporting: tuple[tuple[Mention, AssertionStatus], ...] = field(default=())

    @property
    def evidence(self) -> list[str]:
        return [f"{m.report_id}:{m.start}-{m.end}:{status.value}" for m, status in self.supporting]


def _word_pattern(word: str, acronym: bool) -> str:
    if acronym or not word[0].isalpha():
        return re.escape(word)
    first = word[0]
    return f"[{first.lower()}{first.upper()}]" + re.escape(word[1:])


def synonym_regex(synonym: Synonym) -> re.Pattern:
    """Word-bounded regex for one synonym.

    Phrase words match with either case on the first letter only and any
    run of whitespace between words; acronyms match exactly.
    """
    words = synonym.surface.split()
    body = r"\s+".join(_word_pattern(w, synonym.acronym) for w in words)
    return re.compile(rf"(?<!\w){body}(?!\w)")


def generate_term_patterns(element: str, lex: TermLexicon) -> list[TermPattern]:
    return [TermPattern(s, synonym_regex(s)) for s in lex.synonyms(element)]


def _cached_patterns(element: str, lex: TermLexicon) -> tuple[TermPattern, ...]:
    if element not in lex._cache:
        lex._cache[element] = tuple(generate_term_patterns(element, lex))
    return lex._cache[element]


def find_mentions(text: str, patterns: Iterable[TermPattern], element: str,
                  report_id: str = "", when: Optional[date] = None,
                  sentences: Optional[list[Sentence]] = None) -> list[Mention]:
    """Non-overlapping mentions, leftmost first and longest at each start."""
    hits = []
    for pattern in patterns:
        for m in pattern.regex.finditer(text):
            hits.append((m.start(), -m.end(), pattern.synonym))
    if not hits:
        return []
    hits.sort(key=lambda h: (h[0], h[1]))
    if sentences is None:
        sentences = split_sentences(text)

    out = []
    last_end = -1
    for start, neg_end, synonym in hits:
        end = -neg_end
        if start < last_end:
            continue
        sentence = next((s for s in sentences if s.start <= start and end <= s.end), None)
        if sentence is None:  # match straddles a sentence break
            continue
        out.append(Mention(element, text[start:end], start, end, sentence, report_id, when, synonym.ambiguous))
        last_end = end
    return out


def _scope_end(sentence: Sentence, start: int, stops: list[int], window: int) -> int:
    end = sentence.end
    for i, tok in enumerate(tokens(sentence.text, start - sentence.start)):
        if i + 1 == window:
            end = sentence.start + tok.end()
            break
    return min([end] + [s for s in stops if s >= start])


def _scope_start(sentence: Sentence, end: int, stops: list[int], window: int) -> int:
    toks = list(tokens(sentence.text, 0, end - sentence.start))
    start = sentence.start + toks[-window].start() if len(toks) >= window else sentence.start
    return max([start] + [s for s in stops if s <= end])


def assert_status(mention: Mention, triggers: TriggerLexicon, window: int = DEFAULT_WINDOW) -> AssertionStatus:
    sentence = mention.sentence
    found = [(sentence.start + a, sentence.start + b, t) for a, b, t in triggers.find(sentence.text)]
    terminators = [(a, b) for a, b, t in found if t.category is TriggerCategory.SCOPE_TERMINATOR]

    claimed = set()
    for a, b, trigger in found:
        if trigger.category is TriggerCategory.SCOPE_TERMINATOR:
            continue
        if a < mention.end and mention.start < b:  # trigger overlaps the mention itself
            continue
        if trigger.backward:
            lo = _scope_start(sentence, a, [e for _, e in terminators], window)
            covered = lo <= mention.start < a
        else:
            hi = _scope_end(sentence, b, [s for s, _ in terminators], window)
            covered = b <= mention.start < hi
        if covered:
            claimed.add(STATUS_OF[trigger.category])

    for status in PRECEDENCE:
        if status in claimed:
            return status
    return AssertionStatus.AFFIRMED


def aggregate(element: str, assessed: Iterable[tuple[Mention, AssertionStatus]]) -> PresenceFinding:
    """Presence needs an affirmed mention of a non-ambiguous synonym.

    With none, the element is ambiguous if some mention is screening or
    hypothetical, or is an affirmed mention of an ambiguous synonym.
    """
    assessed = tuple(assessed)
    present = any(s is AssertionStatus.AFFIRMED and not m.ambiguous_synonym for m, s in assessed)
    ambiguous = not present and any(
        s in AMBIGUOUS_STATUSES or (s is AssertionStatus.AFFIRMED and m.ambiguous_synonym)
        for m, s in assessed)
    return PresenceFinding(element, present, ambiguous, assessed)


def element_present(record: PatientRecord, element: str, report_kinds: Iterable,
                    terms: TermLexicon, triggers: TriggerLexicon,
                    window: int = DEFAULT_WINDOW) -> PresenceFinding:
    patterns = _cached_patterns(element, terms)
    assessed = []
    for report in record.reports_of(report_kinds):
        if not report.text:
            continue
        for mention in find_mentions(report.text, patterns, element, report.report_id, report.date):
            assessed.append((mention, assert_status(mention, triggers, window)))
    return aggregate(element, assessed)
