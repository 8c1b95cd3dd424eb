"""Drug-class, term-synonym and assertion-trigger lexicons.

All three are tab-separated UTF-8 files with ``#`` comments:

* ``drugs.tsv``    ``class<TAB>drug_name``
* ``terms.tsv``    ``element<TAB>synonym<TAB>phrase|acronym[<TAB>ambiguous]``
* ``triggers.tsv`` ``category<TAB>phrase[<TAB>forward|backward]``
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterator, Optional

REQUIRED_DRUG_CLASSES = (
    "beta_blocker",
    "dihydropyridine",
    "nondihydropyridine",
    "antihypertensive_other",
    "ace_inhibitor",
    "arb",
)

DRUGS_FILE = "drugs.tsv"
TERMS_FILE = "terms.tsv"
TRIGGERS_FILE = "triggers.tsv"


class LexiconError(Exception):
    """A lexicon file violates its format or invariants."""

    def __init__(self, path, line: Optional[int], message: str):
        where = f"{path}:{line}" if line else str(path)
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line


class TriggerCategory(str, Enum):
    NEGATION = "negation"
    EXPERIENCER_OTHER = "experiencer_other"
    HISTORICAL = "historical"
    HYPOTHETICAL = "hypothetical"
    SCREENING = "screening"
    SCOPE_TERMINATOR = "scope_terminator"


def _rows(path: Path) -> Iterator[tuple[int, list[str]]]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise LexiconError(path, None, f"cannot read lexicon: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield lineno, [cell.strip() for cell in line.split("\t")]


# trailing dosage/form noise: "Carvedilol 25 mg tablet", "Losartan 50MG"
_DOSAGE = re.compile(r"\s+\d.*$")
_FORM_WORDS = re.compile(r"\s+(?:tab|tabs|tablet|tablets|cap|caps|capsule|capsules|oral|er|xl|sr|cr|la)\b.*$")


def drug_key(name: str) -> str:
    key = " ".join(name.lower().split())
    key = _DOSAGE.sub("", key)
    key = _FORM_WORDS.sub("", key)
    return key.strip()


@dataclass(frozen=True)
class DrugLexicon:
    classes: dict[str, frozenset[str]]

    def __post_init__(self):
        index = {}
        for cls, names in self.classes.items():
            for name in names:
                index[name] = cls
        object.__setattr__(self, "_index", index)

    def class_of(self, name: str) -> Optional[str]:
        return classify_drug(name, self)


def classify_drug(name: str, lex: DrugLexicon) -> Optional[str]:
    """Drug class for a medication name, or None.

    Exact lexicon entry first (case-insensitive, dosage suffix trimmed),
    then each ``/``-separated component of a combination product in order.
    """
    index = lex._index
    key = drug_key(name)
    if key in index:
        return index[key]
    if "/" in key:
        for part in key.split("/"):
            part = drug_key(part)
            if part in index:
                return index[part]
    return None


@dataclass(frozen=True)
class Synonym:
    surface: str
    acronym: bool = False
    ambiguous: bool = False


@dataclass(frozen=True)
class TermLexicon:
    elements: dict[str, tuple[Synonym, ...]]
    # compiled patterns per element, filled on first use
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def synonyms(self, element: str) -> tuple[Synonym, ...]:
        try:
            return self.elements[element]
        except KeyError:
            raise KeyError(f"unknown element {element!r}") from None


@dataclass(frozen=True)
class Trigger:
    phrase: str
    category: TriggerCategory
    backward: bool = False


@dataclass(frozen=True)
class TriggerLexicon:
    triggers: tuple[Trigger, ...]
    _pattern: re.Pattern = field(init=False, repr=False, compare=False)
    _by_phrase: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        by_phrase = {t.phrase.lower(): t for t in self.triggers}
        alts = []
        for phrase in sorted(by_phrase, key=len, reverse=True):
            body = r"\s+".join(re.escape(w) for w in phrase.split())
            left = r"(?<!\w)" if phrase[0].isalnum() else ""
            right = r"(?!\w)" if phrase[-1].isalnum() else ""
            alts.append(left + body + right)
        object.__setattr__(self, "_by_phrase", by_phrase)
        object.__setattr__(self, "_pattern", re.compile("|".join(alts), re.IGNORECASE))

    def find(self, text: str) -> list[tuple[int, int, Trigger]]:
        """Leftmost-longest, non-overlapping trigger matches in ``text``."""
        out = []
        for m in self._pattern.finditer(text):
            phrase = " ".join(m.group(0).lower().split())
            out.append((m.start(), m.end(), self._by_phrase[phrase]))
        return out


@dataclass(frozen=True)
class Lexicons:
    drugs: DrugLexicon
    terms: TermLexicon
    triggers: TriggerLexicon


def load_drug_lexicon(path: str | Path) -> DrugLexicon:
    path = Path(path)
    classes: dict[str, set[str]] = {}
    owner: dict[str, tuple[str, int]] = {}
    for lineno, cells in _rows(path):
        if len(cells) != 2 or not all(cells):
            raise LexiconError(path, lineno, "expected 'class<TAB>drug_name'")
        cls, name = cells
        key = drug_key(name)
        if key in owner and owner[key][0] != cls:
            first_cls, first_line = owner[key]
            raise LexiconError(path, lineno,
                               f"drug {name!r} already listed under {first_cls!r} (line {first_line})")
        owner.setdefault(key, (cls, lineno))
        classes.setdefault(cls, set()).add(key)
    missing = [c for c in REQUIRED_DRUG_CLASSES if c not in classes]
    if missing:
        raise LexiconError(path, None, f"missing required drug classes: {', '.join(missing)}")
    return DrugLexicon({cls: frozenset(names) for cls, names in classes.items()})


def load_term_lexicon(path: str | Path) -> TermLexicon:
    path = Path(path)
    elements: dict[str, list[Synonym]] = {}
    for lineno, cells in _rows(path):
        if len(cells) not in (3, 4):
            raise LexiconError(path, lineno, "expected 'element<TAB>synonym<TAB>phrase|acronym'")
        element, surface, form = cells[:3]
        if not element:
            raise LexiconError(path, lineno, "empty element name")
        if not surface:
            raise LexiconError(path, lineno, f"empty synonym for element {element!r}")
        if form not in ("phrase", "acronym"):
            raise LexiconError(path, lineno, f"synonym form must be phrase or acronym, got {form!r}")
        flag = cells[3] if len(cells) == 4 else ""
        if flag not in ("", "ambiguous"):
            raise LexiconError(path, lineno, f"unknown synonym flag {flag!r}")
        elements.setdefault(element, []).append(
            Synonym(" ".join(surface.split()), acronym=form == "acronym", ambiguous=flag == "ambiguous"))
    return TermLexicon({e: tuple(s) for e, s in elements.items()})


def load_trigger_lexicon(path: str | Path) -> TriggerLexicon:
    path = Path(path)
    triggers: dict[str, Trigger] = {}
    for lineno, cells in _rows(path):
        if len(cells) not in (2, 3):
            raise LexiconError(path, lineno, "expected 'category<TAB>phrase[<TAB>forward|backward]'")
        try:
            category = TriggerCategory(cells[0])
        except ValueError:
            raise LexiconError(path, lineno, f"unknown trigger category {cells[0]!r}") from None
        phrase = " ".join(cells[1].split())
        if not phrase:
            raise LexiconError(path, lineno, "empty trigger phrase")
        direction = cells[2] if len(cells) == 3 else "forward"
        if direction not in ("forward", "backward"):
            raise LexiconError(path, lineno, f"direction must be forward or backward, got {direction!r}")
        if phrase.lower() in triggers:
            raise LexiconError(path, lineno, f"duplicate trigger phrase {phrase!r}")
        triggers[phrase.lower()] = Trigger(phrase, category, backward=direction == "backward")
    return TriggerLexicon(tuple(triggers.values()))


def default_lexicon_dir() -> Path:
    return Path(str(resources.files("trialscreen") / "data" / "lexicons"))


def load_lexicons(directory: str | Path | None = None) -> Lexicons:
    """Load the three lexicon files from ``directory`` (shipped defaults if None)."""
    directory = Path(directory) if directory is not None else default_lexicon_dir()
    if not directory.is_dir():
        raise LexiconError(directory, None, "lexicon directory does not exist")
    return Lexicons(
        drugs=load_drug_lexicon(directory / DRUGS_FILE),
        terms=load_term_lexicon(directory / TERMS_FILE),
        triggers=load_trigger_lexicon(directory / TRIGGERS_FILE),
    )
