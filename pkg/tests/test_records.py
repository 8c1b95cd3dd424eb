import json
from datetime import date

import pytest

from trialscreen.records import (IssueCode, RecordError, ReportKind, as_number, dump_records, load_records,
                                 parse_date, parse_patient)


def _patient(pid="P1", **report):
    base = {"report_id": "r1", "kind": "lab", "date": "2015-01-02", "structured": {}, "text": ""}
    base.update(report)
    return {"patient_id": pid, "reports": [base]}


def _write(tmp_path, lines):
    path = tmp_path / "cohort.jsonl"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def test_parse_date():
    assert parse_date("2015-03-04") == date(2015, 3, 4)
    assert parse_date("2015-03-04T10:00:00") == date(2015, 3, 4)
    assert parse_date("03/04/2015") is None
    assert parse_date(None) is None
    assert parse_date(20150304) is None


@pytest.mark.parametrize("raw, expected", [
    (5, 5.0), ("12.5", 12.5), (" 7 ", 7.0), ("n/a", None), (True, None), (float("nan"), None), (None, None),
])
def test_as_number(raw, expected):
    assert as_number(raw) == expected


def test_parse_patient_builds_typed_reports():
    record, issues = parse_patient(_patient(structured={"analytes": [{"name": "Hemoglobin", "value": 11}]}))
    assert record.patient_id == "P1"
    assert record.reports[0].kind is ReportKind.LAB
    assert record.reports[0].date == date(2015, 1, 2)
    assert record.reports[0].analytes()[0].value == 11
    assert issues == []


def test_unknown_kind_is_skipped_with_issue():
    record, issues = parse_patient(_patient(kind="radiology"))
    assert record.reports == ()
    assert [i.code for i in issues] == [IssueCode.UNKNOWN_KIND]


@pytest.mark.parametrize("obj", [
    [], {"patient_id": ""}, {"patient_id": "P1", "reports": {}}, {"patient_id": "P1", "reports": [3]},
    _patient(structured=[1]), _patient(text=5),
])
def test_malformed_patient_raises(obj):
    with pytest.raises(ValueError):
        parse_patient(obj)


def test_quality_issues_do_not_drop_data():
    obj = _patient(date="yesterday", kind="encounter_diagnosis", structured={"age": "old", "bmi": 30})
    record, issues = parse_patient(obj)
    codes = sorted(i.code.value for i in issues)
    assert codes == ["missing_date", "unparseable_value"]
    assert record.reports[0].structured["age"] == "old"


def test_medication_issues():
    meds = [{"name": "Carvedilol", "start_date": "2014-01-01"},
            {"name": "Lisinopril", "start_date": "soon", "end_date": "never"}]
    record, issues = parse_patient(_patient(kind="medication", structured={"medications": meds}))
    codes = [i.code for i in issues]
    assert codes.count(IssueCode.MISSING_END_DATE) == 1
    assert codes.count(IssueCode.UNPARSEABLE_VALUE) == 2
    assert record.reports[0].medications()[0].end_date is None


def test_load_records_tolerates_bad_lines(tmp_path):
    path = _write(tmp_path, [
        json.dumps(_patient("A")),
        "",
        "{not json",
        json.dumps(_patient("A")),
        json.dumps(_patient("B", kind="echo")),
    ])
    cohort = load_records(path)
    assert [r.patient_id for r in cohort] == ["A", "B"]
    malformed = [i for i in cohort.issues if i.code is IssueCode.MALFORMED_LINE]
    assert [i.line for i in malformed] == [3, 4]
    assert "duplicate" in malformed[1].message


def test_load_records_missing_file(tmp_path):
    with pytest.raises(RecordError):
        load_records(tmp_path / "nope.jsonl")


def test_dump_round_trip(tmp_path):
    original = load_records(_write(tmp_path, [json.dumps(_patient("A", text="LVEF 55%."))]))
    out = tmp_path / "again.jsonl"
    dump_records(original.records, out)
    assert load_records(out).records == original.records


def test_reports_of_filters_by_kind():
    record, _ = parse_patient({"patient_id": "P", "reports": [
        {"report_id": "a", "kind": "echo"}, {"report_id": "b", "kind": "lab"}, {"report_id": "c", "kind": "echo"}]})
    assert [r.report_id for r in record.reports_of(["echo"])] == ["a", "c"]
