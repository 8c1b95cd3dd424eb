"""Structured-field values and active-medication class counts."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from typing import Iterable, Optional

from .lexicons import DrugLexicon, classify_drug, drug_key
from .records import NUMERIC_FIELDS, PatientRecord, as_number

UNITS = {
    "age": "years",
    "bmi": "kg/m2",
    "hemoglobin": "g/dL",
    "gfr": "mL/min/1.73m2",
    "systolic_bp": "mmHg",
    "diastolic_bp": "mmHg",
    "bnp": "pg/mL",
    "antihypertensive_class_count": "classes",
}

ANALYTE_ALIASES = {
    "hemoglobin": "hemoglobin",
    "hgb": "hemoglobin",
    "gfr": "gfr",
    "egfr": "gfr",
    "bnp": "bnp",
    "nt-probnp": "bnp",
}

# values outside these bounds are kept but flagged implausible
PLAUSIBLE = {
    "hemoglobin": (3.0, 25.0),
    "gfr": (1.0, 250.0),
    "bmi": (10.0, 100.0),
    "systolic_bp": (50.0, 300.0),
    "diastolic_bp": (20.0, 200.0),
    "bnp": (0.0, 70000.0),
}


@dataclass(frozen=True)
class Fact:
    element: str
    value: float | bool | str
    unit: str
    date: Optional[date]
    report_id: str
    source: str  # structured field name, analyte name or text span
    assertion: str = "affirmed"
    plausible: bool = True

    @property
    def provenance(self) -> str:
        return f"{self.report_id}:{self.source}"


def is_plausible(element: str, value: float) -> bool:
    bounds = PLAUSIBLE.get(element)
    return bounds is None or bounds[0] <= value <= bounds[1]


def _numeric_fact(element, value, unit, when, report_id, source) -> Fact:
    return Fact(element, value, unit, when, report_id, source,
                plausible=is_plausible(element, value))


def extract_structured_values(record: PatientRecord) -> list[Fact]:
    """Numeric facts from structured fields and analyte entries of every report.

    Non-numeric values are skipped; :func:`records.validate_record` already
    reports them as ``unparseable_value``.
    """
    facts = []
    for report in record.reports:
        for name in NUMERIC_FIELDS:
            if name not in report.structured:
                continue
            value = as_number(report.structured[name])
            if value is not None:
                facts.append(_numeric_fact(name, value, UNITS[name], report.date, report.report_id, name))
        for analyte in report.analytes():
            element = ANALYTE_ALIASES.get(analyte.name.strip().lower())
            value = as_number(analyte.value)
            if element is None or value is None:
                continue
            facts.append(_numeric_fact(element, value, analyte.unit or UNITS[element],
                                       analyte.date, report.report_id, analyte.name))
    return facts


def _recency(fact: Fact):
    return (fact.date or date.min, fact.report_id)


def latest_value(facts: Iterable[Fact], element: str) -> Optional[Fact]:
    """Most recent fact for ``element``; same-day ties go to the larger report_id."""
    candidates = [f for f in facts if f.element == element]
    if not candidates:
        return None
    return max(candidates, key=_recency)


@dataclass(frozen=True)
class MedClassCount:
    drug_class: str
    drugs: frozenset[str]

    @property
    def count(self) -> int:
        return len(self.drugs)


def is_active(start: Optional[date], end: Optional[date], as_of: date) -> bool:
    # unknown start counts as started; unknown end counts as ongoing
    return (start is None or start <= as_of) and (end is None or end >= as_of)


def count_drug_classes(record: PatientRecord, lex: DrugLexicon, classes: Iterable[str],
                       as_of: Optional[date] = None) -> list[MedClassCount]:
    as_of = as_of or date.today()
    wanted = list(dict.fromkeys(classes))
    found: dict[str, set[str]] = {c: set() for c in wanted}
    for report in record.reports:
        for med in report.medications():
            if not is_active(med.start_date, med.end_date, as_of):
                continue
            cls = classify_drug(med.name, lex)
            if cls in found:
                found[cls].add(drug_key(med.name))
    return [MedClassCount(c, frozenset(found[c])) for c in wanted]


def antihypertensive_class_count(record: PatientRecord, lex: DrugLexicon,
                                 as_of: Optional[date] = None) -> Fact:
    """Number of drug classes with at least one active medication."""
    counts = count_drug_classes(record, lex, sorted(lex.classes), as_of)
    hit = [c.drug_class for c in counts if c.count]
    return Fact("antihypertensive_class_count", float(len(hit)), UNITS["antihypertensive_class_count"],
                as_of or date.today(), "medications", ",".join(hit) or "none")
