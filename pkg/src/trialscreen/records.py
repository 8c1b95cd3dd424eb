"""Patient record model and line-delimited JSON cohort loading.

One patient per line::

    {"patient_id": "P1", "reports": [{"report_id": "R1", "kind": "echo",
      "date": "2015-03-01", "structured": {}, "text": "EF 55%."}]}

Lab reports carry ``structured["analytes"]`` entries ``{name, value, unit}``
and medication reports carry ``structured["medications"]`` entries
``{name, start_date, end_date?}``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Iterator, Optional


class ReportKind(str, Enum):
    ENCOUNTER_DIAGNOSIS = "encounter_diagnosis"
    ENCOUNTER_NOTE = "encounter_note"
    PROBLEM_LIST = "problem_list"
    ECHO = "echo"
    LAB = "lab"
    MEDICATION = "medication"


class IssueCode(str, Enum):
    MISSING_DATE = "missing_date"
    MISSING_END_DATE = "missing_end_date"
    UNPARSEABLE_VALUE = "unparseable_value"
    UNKNOWN_KIND = "unknown_kind"
    # whole line rejected: bad JSON, bad shape, duplicate patient_id
    MALFORMED_LINE = "malformed_line"


# structured fields read by the normalizer; a non-numeric value here is a data-quality issue
NUMERIC_FIELDS = ("age", "bmi", "systolic_bp", "diastolic_bp")


class RecordError(Exception):
    """Fatal problem reading a cohort file."""


@dataclass(frozen=True)
class DataQualityIssue:
    patient_id: str
    report_id: Optional[str]
    code: IssueCode
    message: str
    line: Optional[int] = None

    @property
    def report_usable(self) -> bool:
        return self.code not in (IssueCode.UNKNOWN_KIND, IssueCode.MALFORMED_LINE)


@dataclass(frozen=True)
class Analyte:
    name: str
    value: Any
    unit: str
    date: Optional[date]


@dataclass(frozen=True)
class MedicationEntry:
    name: str
    start_date: Optional[date]
    end_date: Optional[date]


def parse_date(value: Any) -> Optional[date]:
    """ISO ``YYYY-MM-DD`` to :class:`date`; anything else gives None."""
    if isinstance(value, date):
        return value
    if not isinstance(value, str):
        return None
    try:
        return date.fromisoformat(value.strip()[:10])
    except ValueError:
        return None


def as_number(value: Any) -> Optional[float]:
    if isinstance(value, bool):
        return None
    if isinstance(value, (int, float)):
        return float(value) if math.isfinite(value) else None
    if isinstance(value, str):
        try:
            number = float(value.strip())
        except ValueError:
            return None
        return number if math.isfinite(number) else None
    return None


@dataclass(frozen=True)
class Report:
    report_id: str
    kind: ReportKind
    date: Optional[date]
    structured: dict = field(default_factory=dict)
    text: str = ""

    def analytes(self) -> list[Analyte]:
        out = []
        for entry in self.structured.get("analytes", ()) or ():
            if not isinstance(entry, dict):
                continue
            out.append(Analyte(
                name=str(entry.get("name", "")),
                value=entry.get("value"),
                unit=str(entry.get("unit", "")),
                date=parse_date(entry.get("date")) or self.date,
            ))
        return out

    def medications(self) -> list[MedicationEntry]:
        out = []
        for entry in self.structured.get("medications", ()) or ():
            if not isinstance(entry, dict):
                continue
            out.append(MedicationEntry(
                name=str(entry.get("name", "")),
                start_date=parse_date(entry.get("start_date")),
                end_date=parse_date(entry.get("end_date")),
            ))
        return out

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"report_id": self.report_id, "kind": self.kind.value}
        if self.date is not None:
            out["date"] = self.date.isoformat()
        out["structured"] = self.structured
        out["text"] = self.text
        return out


@dataclass(frozen=True)
class PatientRecord:
    patient_id: str
    reports: tuple[Report, ...] = ()

    def reports_of(self, kinds: Iterable[ReportKind | str]) -> list[Report]:
        wanted = {ReportKind(k) for k in kinds}
        return [r for r in self.reports if r.kind in wanted]

    def to_dict(self) -> dict:
        return {"patient_id": self.patient_id, "reports": [r.to_dict() for r in self.reports]}


@dataclass
class Cohort:
    records: list[PatientRecord] = field(default_factory=list)
    issues: list[DataQualityIssue] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[PatientRecord]:
        return iter(self.records)


def validate_record(record: PatientRecord) -> list[DataQualityIssue]:
    """Data-quality issues for an already parsed record. Never mutates it."""
    issues = []
    pid = record.patient_id

    def add(report: Report, code: IssueCode, message: str) -> None:
        issues.append(DataQualityIssue(pid, report.report_id, code, message))

    for report in record.reports:
        if report.date is None:
            add(report, IssueCode.MISSING_DATE, "report has no parseable ISO-8601 date")
        for name in NUMERIC_FIELDS:
            if name in report.structured and as_number(report.structured[name]) is None:
                add(report, IssueCode.UNPARSEABLE_VALUE,
                    f"field {name!r} is not numeric: {report.structured[name]!r}")
        for entry in report.structured.get("analytes", ()) or ():
            value = entry.get("value") if isinstance(entry, dict) else entry
            if as_number(value) is None:
                name = entry.get("name", "?") if isinstance(entry, dict) else "?"
                add(report, IssueCode.UNPARSEABLE_VALUE,
                    f"analyte {name!r} has non-numeric value {value!r}")
        for entry in report.structured.get("medications", ()) or ():
            if not isinstance(entry, dict):
                add(report, IssueCode.UNPARSEABLE_VALUE, f"medication entry is not an object: {entry!r}")
                continue
            name = entry.get("name", "?")
            if entry.get("end_date") in (None, ""):
                add(report, IssueCode.MISSING_END_DATE,
                    f"medication {name!r} has no end_date; treated as active")
            elif parse_date(entry["end_date"]) is None:
                add(report, IssueCode.UNPARSEABLE_VALUE,
                    f"medication {name!r} end_date {entry['end_date']!r} is not a date")
            if entry.get("start_date") not in (None, "") and parse_date(entry["start_date"]) is None:
                add(report, IssueCode.UNPARSEABLE_VALUE,
                    f"medication {name!r} start_date {entry['start_date']!r} is not a date")
    return issues


def parse_patient(obj: Any, line: Optional[int] = None) -> tuple[PatientRecord, list[DataQualityIssue]]:
    """Build a record from one decoded JSON object.

    Raises ValueError when the object cannot be a patient at all. Reports
    with an unknown kind are dropped with an ``unknown_kind`` issue.
    """
    if not isinstance(obj, dict):
        raise ValueError("patient line must be a JSON object")
    pid = obj.get("patient_id")
    if not isinstance(pid, str) or not pid.strip():
        raise ValueError("patient_id must be a non-empty string")
    raw_reports = obj.get("reports", [])
    if not isinstance(raw_reports, list):
        raise ValueError("reports must be a list")

    issues: list[DataQualityIssue] = []
    reports = []
    for i, raw in enumerate(raw_reports):
        if not isinstance(raw, dict):
            raise ValueError(f"report #{i} is not an object")
        rid = str(raw.get("report_id", f"{pid}#{i}"))
        try:
            kind = ReportKind(raw.get("kind"))
        except ValueError:
            issues.append(DataQualityIssue(pid, rid, IssueCode.UNKNOWN_KIND,
                                           f"unknown report kind {raw.get('kind')!r}; report skipped", line))
            continue
        structured = raw.get("structured") or {}
        if not isinstance(structured, dict):
            raise ValueError(f"report {rid!r}: structured must be an object")
        text = raw.get("text") or ""
        if not isinstance(text, str):
            raise ValueError(f"report {rid!r}: text must be a string")
        reports.append(Report(rid, kind, parse_date(raw.get("date")), structured, text))

    record = PatientRecord(pid, tuple(reports))
    issues.extend(
        DataQualityIssue(i.patient_id, i.report_id, i.code, i.message, line)
        for i in validate_record(record)
    )
    return record, issues


def iter_lines(path: str | Path) -> Iterator[tuple[int, str]]:
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise RecordError(f"cannot read {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip():
                yield lineno, line


def load_records(path: str | Path) -> Cohort:
    """Load a cohort file. Blank lines are ignored; bad lines become issues."""
    cohort = Cohort()
    seen: set[str] = set()
    for lineno, line in iter_lines(path):
        obj: Any = None
        try:
            obj = json.loads(line)
            record, issues = parse_patient(obj, lineno)
            if record.patient_id in seen:
                raise ValueError(f"duplicate patient_id {record.patient_id!r}")
        except ValueError as exc:  # JSONDecodeError is a ValueError
            pid = obj.get("patient_id") if isinstance(obj, dict) else None
            cohort.issues.append(DataQualityIssue(str(pid or ""), None, IssueCode.MALFORMED_LINE,
                                                  f"line {lineno}: {exc}", lineno))
            continue
        seen.add(record.patient_id)
        cohort.records.append(record)
        cohort.issues.extend(issues)
    return cohort


def dump_records(records: Iterable[PatientRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")
