"""Random synthetic cohorts for load testing and demos.

Report volumes follow the per-patient mix of a real HF cohort
(encounters : echo : labs : medication entries : problem lists =
54173 : 96281 : 52393 : 4490 : 3521 per 198 patients), divided by
``scale`` to keep file sizes manageable.
"""

from __future__ import annotations

import json
import random
from datetime import date, timedelta
from pathlib import Path
from typing import Iterator

PER_PATIENT = {
    "encounter": 54173 / 198,
    "echo": 96281 / 198,
    "lab": 52393 / 198,
    "medication_entry": 4490 / 198,
    "problem_list": 3521 / 198,
}

_EF_SENTENCES = [
    "The left ventricular ejection fraction is {ef}%.",
    "LVEF estimated at {lo} to {hi}%.",
    "EF {ef} %.",
    "Left ventricular systolic function is {qual}.",
    "Moderate left ventricular systolic dysfunction.",
]
_ECHO_FILLER = [
    "Normal right ventricular size.",
    "Mild mitral regurgitation.",
    "No pericardial effusion.",
    "Aortic valve is trileaflet.",
    "No evidence of hypertrophic cardiomyopathy.",
    "Findings concerning for cardiac amyloidosis.",
]
_NOTE_SENTENCES = [
    "Patient seen for follow up of heart failure.",
    "History of hypertension and diabetes.",
    "No history of angioedema.",
    "Family history of cardiomyopathy.",
    "Denies chest pain.",
    "Screening for malignancy scheduled.",
    "s/p kidney transplant in 2009.",
    "ICD in place.",
    "Acute pancreatitis was ruled out.",
    "Possible HF exacerbation.",
    "Continue current medications.",
]
_DIAGNOSES = ["Chronic diastolic heart failure", "Hypertension", "CHF", "Atrial fibrillation", "CKD stage 3"]
_QUAL = ["normal", "low normal", "mildly reduced", "severely reduced", "well preserved"]
_DRUGS = ["Carvedilol", "Amlodipine", "Losartan", "Lisinopril", "Diltiazem", "Hydralazine", "Aspirin",
          "Atorvastatin", "Furosemide", "Metoprolol"]


def _count(rng: random.Random, mean: float) -> int:
    return max(0, int(rng.gauss(mean, mean / 4) + 0.5))


def _day(rng: random.Random, start: date, span: int = 1500) -> date:
    return start + timedelta(days=rng.randrange(span))


def generate_patient(rng: random.Random, pid: str, scale: float = 25.0) -> dict:
    start = date(2011, 1, 1)
    reports = []

    def add(kind, structured=None, text=""):
        reports.append({"report_id": f"{pid}-{len(reports):04d}", "kind": kind,
                        "date": _day(rng, start).isoformat(), "structured": structured or {}, "text": text})

    for _ in range(_count(rng, PER_PATIENT["encounter"] / scale)):
        if rng.random() < 0.5:
            add("encounter_diagnosis", {
                "age": rng.randint(40, 95), "bmi": round(rng.uniform(18, 48), 1),
                "systolic_bp": rng.randint(95, 195), "diastolic_bp": rng.randint(50, 110)},
                rng.choice(_DIAGNOSES) + ".")
        else:
            add("encounter_note", text=" ".join(rng.sample(_NOTE_SENTENCES, 4)))
    for _ in range(_count(rng, PER_PATIENT["echo"] / scale)):
        lo = rng.randrange(20, 65, 5)
        ef = rng.choice(_EF_SENTENCES).format(
            ef=rng.randint(15, 75), lo=lo, hi=lo + 5, qual=rng.choice(_QUAL))
        add("echo", text=ef + " " + " ".join(rng.sample(_ECHO_FILLER, 2)))
    for _ in range(_count(rng, PER_PATIENT["lab"] / scale)):
        add("lab", {"analytes": [
            {"name": "Hemoglobin", "value": round(rng.uniform(7, 16), 1), "unit": "g/dL"},
            {"name": "eGFR", "value": rng.randint(15, 110), "unit": "mL/min/1.73m2"}]})
    meds = []
    for _ in range(max(1, _count(rng, PER_PATIENT["medication_entry"] / scale))):
        entry = {"name": rng.choice(_DRUGS), "start_date": _day(rng, start).isoformat()}
        if rng.random() < 0.5:
            entry["end_date"] = _day(rng, start, 2500).isoformat()
        meds.append(entry)
    add("medication", {"medications": meds})
    for _ in range(max(1, _count(rng, PER_PATIENT["problem_list"] / scale))):
        add("problem_list", text=", ".join(rng.sample(_DIAGNOSES, 3)))
    return {"patient_id": pid, "reports": reports}


def generate_cohort(n: int, seed: int = 0, scale: float = 25.0) -> Iterator[dict]:
    rng = random.Random(seed)
    for i in range(n):
        yield generate_patient(rng, f"S{i:05d}", scale)


def write_cohort(path: str | Path, n: int, seed: int = 0, scale: float = 25.0) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for patient in generate_cohort(n, seed, scale):
            fh.write(json.dumps(patient) + "\n")
    return path
