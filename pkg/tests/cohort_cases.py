"""Hand-built screening cohort with gold verdicts.

Every patient is the clean eligible baseline below plus one perturbation.
Gold verdict, first discard reason and the set of criteria expected to warn
were written by hand from the criteria file, not produced by the engine.
"""

from __future__ import annotations

from dataclasses import dataclass, field

AS_OF = "2015-06-01"

BASE = dict(
    age=68, bmi=31.0, sbp=138, dbp=80,
    dx="Chronic diastolic heart failure.",
    note="Seen in clinic for follow up. No chest pain.",
    echo="The left ventricular ejection fraction is 60%. Mild mitral regurgitation.",
    labs={"Hemoglobin": 12.5, "eGFR": 60},
    meds=[("Carvedilol", None), ("Lisinopril", None)],
    problems="Hypertension, heart failure",
    extra=(),
)
NO_HF = dict(dx="Hypertension.", problems="Hypertension")


@dataclass(frozen=True)
class Case:
    pid: str
    why: str
    edits: dict
    verdict: str
    reason: str | None = None
    warns: frozenset = field(default_factory=frozenset)


def _case(pid, why, verdict, reason=None, warns=(), **edits):
    return Case(pid, why, edits, verdict, reason, frozenset(warns))


CASES = [
    # eligible
    _case("E01", "baseline", "eligible"),
    _case("E02", "age and bmi at their limits", "eligible", age=50, bmi=40.0),
    _case("E03", "systolic exactly 150", "eligible", sbp=150),
    _case("E04", "systolic 165 on three classes", "eligible", sbp=165,
          meds=[("Carvedilol", None), ("Lisinopril", None), ("Amlodipine", None)]),
    _case("E05", "systolic 180 on three classes with a combination pill", "eligible", sbp=180,
          meds=[("Carvedilol", None), ("Lisinopril", None), ("Hydralazine/HCTZ", None)]),
    _case("E06", "LVEF exactly 45", "eligible", echo="LVEF 45%."),
    _case("E07", "LVEF range at or above 45", "eligible", echo="Ejection fraction 45 to 50 %."),
    _case("E08", "qualitative normal LVEF", "eligible", echo="Left ventricular systolic function is normal."),
    _case("E09", "negated exclusion terms", "eligible",
          note="No history of angioedema. Pancreatitis was ruled out."),
    _case("E10", "family history of cancer", "eligible",
          problems="Hypertension, heart failure, family history of cancer"),
    _case("E11", "historical pancreatitis is not a current diagnosis", "eligible", note="History of pancreatitis."),
    _case("E12", "labs just above the cut-offs", "eligible", labs={"Hemoglobin": 10.1, "eGFR": 31}),
    _case("E13", "latest blood pressure wins over an older high one", "eligible",
          extra=[("encounter_diagnosis", "2014-06-01", {"age": 67, "bmi": 31.0, "systolic_bp": 185}, "Hypertension.")]),
    _case("E14", "HF only on the problem list", "eligible", dx="Hypertension."),
    _case("E15", "right ventricular EF ignored", "eligible",
          echo="RV ejection fraction 30%. The left ventricular ejection fraction is 55%."),
    _case("E16", "most recent echo wins", "eligible", echo="LVEF 55%.",
          extra=[("echo", "2014-03-01", None, "LVEF 30%.")]),
    _case("E17", "low systolic without any medication list", "eligible", sbp=140, meds=None),
    _case("E18", "third class still active on the reference date", "eligible", sbp=165,
          meds=[("Carvedilol", None), ("Lisinopril", None), ("Amlodipine", "2015-12-31")]),

    # needs review
    _case("R01", "age missing", "needs_review", warns={"age_bmi"}, age=None),
    _case("R02", "implausible BMI", "needs_review", warns={"age_bmi"}, bmi=150.0),
    _case("R03", "HF only hypothetical", "needs_review", warns={"hf_term"},
          note="Possible HF exacerbation.", **NO_HF),
    _case("R04", "no echo at all", "needs_review", warns={"lvef"}, echo=None),
    _case("R05", "unreadable LVEF value", "needs_review", warns={"lvef"}, echo="LVEF 150%."),
    _case("R06", "LVEF range straddles 45", "needs_review", warns={"lvef"}, echo="Ejection fraction 40 to 50 %."),
    _case("R07", "mildly reduced LVEF is indeterminate", "needs_review", warns={"lvef"},
          echo="Left ventricular systolic function is mildly reduced."),
    _case("R08", "angioedema only as rule-out", "needs_review", warns={"angioedema_pancreatitis_ras"},
          note="Rule out angioedema."),
    _case("R09", "transplant only under evaluation", "needs_review", warns={"transplant_or_icd"},
          note="Evaluate for heart transplant."),
    _case("R10", "cancer without a malignancy term", "needs_review", warns={"malignancy"},
          problems="Hypertension, heart failure, breast cancer"),
    _case("R11", "malignancy screening only", "needs_review", warns={"malignancy"}, note="Screening for malignancy."),
    _case("R12", "no labs", "needs_review", warns={"hb_gfr"}, labs=None),
    _case("R13", "hemoglobin missing, normal GFR", "needs_review", warns={"hb_gfr"}, labs={"eGFR": 60}),
    _case("R14", "implausible hemoglobin", "needs_review", warns={"hb_gfr"}, labs={"Hemoglobin": 40, "eGFR": 60}),
    _case("R15", "systolic missing", "needs_review", warns={"bp_antihypertensives"}, sbp=None),
    _case("R16", "systolic 165 without any medication list", "needs_review", warns={"bp_antihypertensives"},
          sbp=165, meds=None),
    _case("R17", "amyloidosis only suspected", "needs_review", warns={"constriction_or_cardiomyopathy"},
          echo="The left ventricular ejection fraction is 60%. Concern for cardiac amyloidosis."),
    _case("R18", "two warnings", "needs_review", warns={"hf_term", "hb_gfr"},
          note="Possible HF exacerbation.", labs=None, **NO_HF),
    _case("R19", "implausible systolic", "needs_review", warns={"bp_antihypertensives"}, sbp=320),

    # excluded
    _case("X01", "too young", "excluded", "age_bmi", age=45),
    _case("X02", "BMI too high", "excluded", "age_bmi", bmi=44.0),
    _case("X03", "too young and HCM: first reason counts", "excluded", "age_bmi", age=49,
          echo="The left ventricular ejection fraction is 60%. Hypertrophic cardiomyopathy."),
    _case("X04", "no HF term anywhere", "excluded", "hf_term", **NO_HF),
    _case("X05", "HF negated", "excluded", "hf_term", note="No heart failure.", **NO_HF),
    _case("X06", "HF only in family", "excluded", "hf_term", note="Family history of heart failure.", **NO_HF),
    _case("X07", "reduced LVEF", "excluded", "lvef", echo="LVEF 35%."),
    _case("X08", "severely reduced function", "excluded", "lvef",
          echo="Left ventricular systolic function is severely reduced."),
    _case("X09", "LVEF range below 45", "excluded", "lvef", echo="LVEF 30-35%."),
    _case("X10", "HF warning then LVEF exclusion", "excluded", "lvef", warns={"hf_term"},
          note="Possible HF exacerbation.", echo="LVEF 35%.", **NO_HF),
    _case("X11", "angioedema", "excluded", "angioedema_pancreatitis_ras", note="Angioedema after lisinopril."),
    _case("X12", "pancreatitis diagnosis", "excluded", "angioedema_pancreatitis_ras", dx="Acute pancreatitis."),
    _case("X13", "bilateral RAS", "excluded", "angioedema_pancreatitis_ras", note="Bilateral renal artery stenosis."),
    _case("X14", "kidney transplant", "excluded", "transplant_or_icd",
          problems="Hypertension, heart failure, kidney transplant"),
    _case("X15", "ICD", "excluded", "transplant_or_icd", note="ICD in place."),
    _case("X16", "AICD", "excluded", "transplant_or_icd", note="AICD placed in 2012."),
    _case("X17", "carcinoma", "excluded", "malignancy", problems="Hypertension, heart failure, prostate carcinoma"),
    _case("X18", "malignant neoplasm", "excluded", "malignancy", note="Malignant neoplasm of colon."),
    _case("X19", "cancer backed by a malignancy term", "excluded", "malignancy",
          problems="Hypertension, heart failure, breast cancer, malignant neoplasm of breast"),
    _case("X20", "anaemia", "excluded", "hb_gfr", labs={"Hemoglobin": 9.1, "eGFR": 60}),
    _case("X21", "low GFR", "excluded", "hb_gfr", labs={"Hemoglobin": 12.5, "eGFR": 25}),
    _case("X22", "hemoglobin exactly 10", "excluded", "hb_gfr", labs={"Hemoglobin": 10.0, "eGFR": 60}),
    _case("X23", "low GFR decides despite missing hemoglobin", "excluded", "hb_gfr", labs={"eGFR": 20}),
    _case("X24", "systolic too high", "excluded", "bp_antihypertensives", sbp=185),
    _case("X25", "systolic 165 on two classes", "excluded", "bp_antihypertensives", sbp=165),
    _case("X26", "third class stopped before the reference date", "excluded", "bp_antihypertensives", sbp=165,
          meds=[("Carvedilol", None), ("Lisinopril", None), ("Amlodipine", "2015-03-01")]),
    _case("X27", "latest blood pressure is the high one", "excluded", "bp_antihypertensives",
          extra=[("encounter_diagnosis", "2015-04-01", {"age": 68, "bmi": 31.0, "systolic_bp": 185}, "Hypertension.")]),
    _case("X28", "constrictive pericarditis", "excluded", "constriction_or_cardiomyopathy",
          echo="The left ventricular ejection fraction is 60%. Findings consistent with constrictive pericarditis."),
    _case("X29", "cardiac amyloidosis", "excluded", "constriction_or_cardiomyopathy",
          echo="The left ventricular ejection fraction is 60%. Cardiac amyloidosis."),
    _case("X30", "HOCM", "excluded", "constriction_or_cardiomyopathy",
          echo="The left ventricular ejection fraction is 60%. Hypertrophic obstructive cardiomyopathy."),
    _case("X31", "too young with no labs", "excluded", "age_bmi", warns={"hb_gfr"}, age=45, labs=None),
]

EXPECTED_DISCARDS = {
    "age_bmi": 4,
    "hf_term": 3,
    "lvef": 4,
    "angioedema_pancreatitis_ras": 3,
    "transplant_or_icd": 3,
    "malignancy": 3,
    "hb_gfr": 4,
    "bp_antihypertensives": 4,
    "constriction_or_cardiomyopathy": 3,
}


def build_record(case: Case) -> dict:
    p = {**BASE, **case.edits}
    pid = case.pid
    reports = []

    def add(kind, when, structured=None, text=""):
        reports.append({"report_id": f"{pid}-{len(reports) + 1:02d}", "kind": kind, "date": when,
                        "structured": structured or {}, "text": text})

    vitals = {"age": p["age"], "bmi": p["bmi"], "systolic_bp": p["sbp"], "diastolic_bp": p["dbp"]}
    add("encounter_diagnosis", "2015-01-10", {k: v for k, v in vitals.items() if v is not None}, p["dx"])
    add("encounter_note", "2015-01-10", text=p["note"])
    if p["echo"] is not None:
        add("echo", "2015-01-12", text=p["echo"])
    if p["labs"] is not None:
        add("lab", "2015-01-11", {"analytes": [
            {"name": name, "value": value, "unit": "g/dL" if name == "Hemoglobin" else "mL/min/1.73m2"}
            for name, value in p["labs"].items()]})
    if p["meds"] is not None:
        meds = []
        for name, end in p["meds"]:
            entry = {"name": name, "start_date": "2014-01-01"}
            if end:
                entry["end_date"] = end
            meds.append(entry)
        add("medication", "2015-01-10", {"medications": meds})
    add("problem_list", "2015-01-10", text=p["problems"])
    for kind, when, structured, text in p["extra"]:
        add(kind, when, structured, text or "")
    return {"patient_id": pid, "reports": reports}


def records() -> list[dict]:
    return [build_record(c) for c in CASES]


def gold_labels() -> dict[str, str]:
    return {c.pid: "excluded" if c.verdict == "excluded" else "included" for c in CASES}
