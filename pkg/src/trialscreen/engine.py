"""Patient profiles and declarative inclusion/exclusion evaluation.

A criteria file is YAML::

    criteria:
      - id: lvef
        label: LVEF
        kind: inclusion
        sources: [echo]
        on_missing: warn
        on_ambiguous: warn
        predicate: {element: lvef, gte: 45}

Predicates are leaves (``gte``, ``lte``, ``between``, ``count_gte``,
``present``, ``absent``) or ``and`` / ``or`` lists of predicates. A leaf
with ``placeholder: true`` carries an unconfirmed threshold.

Leaves evaluate to true, false, missing or ambiguous; ``and``/``or`` use
three-valued logic, and the criterion's policies decide what an unknown
result means for the patient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, Union

import yaml

from .lexicons import Lexicons
from .lvef import DEFAULT_THRESHOLD, Form, LvefFinding, Relation, relation_to_threshold, resolve_with_misses
from .normalizer import Fact, antihypertensive_class_count, extract_structured_values, latest_value
from .records import PatientRecord, ReportKind
from .terms import DEFAULT_WINDOW, PresenceFinding, element_present

NUMERIC_ELEMENTS = (
    "age", "bmi", "hemoglobin", "gfr", "systolic_bp", "diastolic_bp", "bnp",
    "antihypertensive_class_count",
)
COUNT_ELEMENTS = ("antihypertensive_class_count",)
LVEF_ELEMENT = "lvef"
PRESENCE_ELEMENTS = (
    "heart_failure", "angioedema", "pancreatitis", "bilateral_renal_artery_stenosis",
    "organ_transplant", "icd_device", "malignancy", "pericardial_constriction",
    "hypertrophic_cardiomyopathy", "infiltrative_cardiomyopathy",
)
ALL_ELEMENTS = NUMERIC_ELEMENTS + (LVEF_ELEMENT,) + PRESENCE_ELEMENTS

_ENCOUNTER = (ReportKind.ENCOUNTER_DIAGNOSIS, ReportKind.ENCOUNTER_NOTE)
_ENCOUNTER_PROBLEMS = _ENCOUNTER + (ReportKind.PROBLEM_LIST,)

# which report kinds are searched for each presence element
DEFAULT_ROUTING: dict[str, tuple[ReportKind, ...]] = {
    "heart_failure": _ENCOUNTER_PROBLEMS,
    "angioedema": _ENCOUNTER,
    "pancreatitis": _ENCOUNTER,
    "bilateral_renal_artery_stenosis": _ENCOUNTER,
    "organ_transplant": _ENCOUNTER_PROBLEMS,
    "icd_device": _ENCOUNTER_PROBLEMS,
    "malignancy": _ENCOUNTER_PROBLEMS,
    "pericardial_constriction": (ReportKind.ECHO,),
    "hypertrophic_cardiomyopathy": (ReportKind.ECHO,),
    "infiltrative_cardiomyopathy": (ReportKind.ECHO,),
}


class CriteriaError(Exception):
    """Criteria file is malformed or references the profile wrongly."""


class PlaceholderError(Exception):
    """Criteria still contain thresholds marked as placeholders."""

    def __init__(self, placeholders: Sequence[str]):
        super().__init__("unconfirmed placeholder thresholds: " + "; ".join(placeholders))
        self.placeholders = list(placeholders)


class Kind(str, Enum):
    INCLUSION = "inclusion"
    EXCLUSION = "exclusion"


class Policy(str, Enum):
    WARN = "warn"
    FAIL = "fail"  # resolve against the patient
    PASS = "pass"  # resolve in the patient's favour


class Status(str, Enum):
    SATISFIED = "satisfied"
    VIOLATED = "violated"
    WARNING = "warning"


class Verdict(str, Enum):
    ELIGIBLE = "eligible"
    EXCLUDED = "excluded"
    NEEDS_REVIEW = "needs_review"


class Truth(Enum):
    TRUE = "true"
    FALSE = "false"
    MISSING = "missing"
    AMBIGUOUS = "ambiguous"


# ---------------------------------------------------------------- predicates

@dataclass(frozen=True)
class Leaf:
    element: str
    op: str
    value: Any = None
    placeholder: bool = False

    @property
    def elements(self) -> tuple[str, ...]:
        return (self.element,)

    def describe(self) -> str:
        if self.op in ("present", "absent"):
            return f"{self.element} {self.op}"
        if self.op == "between":
            return f"{self.element} between {self.value[0]:g} and {self.value[1]:g}"
        return f"{self.element} {self.op} {self.value:g}"


@dataclass(frozen=True)
class Compound:
    op: str  # "and" | "or"
    parts: tuple[Predicate, ...]

    @property
    def elements(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(e for p in self.parts for e in p.elements))

    def describe(self) -> str:
        return "(" + f" {self.op} ".join(p.describe() for p in self.parts) + ")"


Predicate = Union[Leaf, Compound]

_NUMERIC_OPS = ("gte", "lte", "between")
_LEAF_OPS = _NUMERIC_OPS + ("count_gte", "present", "absent")


def _leaves(p: Predicate) -> Iterable[Leaf]:
    if isinstance(p, Leaf):
        yield p
    else:
        for part in p.parts:
            yield from _leaves(part)


@dataclass(frozen=True)
class Criterion:
    id: str
    kind: Kind
    predicate: Predicate
    sources: tuple[ReportKind, ...] = ()
    on_missing: Policy = Policy.WARN
    on_ambiguous: Policy = Policy.WARN
    label: str = ""

    @property
    def elements(self) -> tuple[str, ...]:
        return self.predicate.elements

    @property
    def element(self) -> str:
        return self.elements[0]


@dataclass(frozen=True)
class CriteriaSet:
    criteria: tuple[Criterion, ...]

    def __iter__(self):
        return iter(self.criteria)

    def __len__(self) -> int:
        return len(self.criteria)

    def __getitem__(self, index):
        return self.criteria[index]

    @property
    def ids(self) -> list[str]:
        return [c.id for c in self.criteria]

    def placeholders(self) -> list[str]:
        return [f"{c.id}: {leaf.describe()}" for c in self.criteria
                for leaf in _leaves(c.predicate) if leaf.placeholder]

    def lvef_threshold(self) -> Optional[float]:
        """Lower LVEF limit of the first ``lvef gte`` leaf, if any."""
        return next((leaf.value for c in self.criteria for leaf in _leaves(c.predicate)
                     if leaf.element == LVEF_ELEMENT and leaf.op == "gte"), None)

    def routing(self) -> dict[str, tuple[ReportKind, ...]]:
        """Report kinds per presence element, from criterion sources where given."""
        routing: dict[str, list[ReportKind]] = {}
        for c in self.criteria:
            if not c.sources:
                continue
            for element in c.elements:
                if element in PRESENCE_ELEMENTS:
                    kinds = routing.setdefault(element, [])
                    kinds.extend(k for k in c.sources if k not in kinds)
        return {**DEFAULT_ROUTING, **{e: tuple(k) for e, k in routing.items()}}


def _number(raw: Any, where: str) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)) or not math.isfinite(raw):
        raise CriteriaError(f"{where}: threshold must be a finite number, got {raw!r}")
    return float(raw)


def _parse_predicate(raw: Any, where: str) -> Predicate:
    if not isinstance(raw, dict):
        raise CriteriaError(f"{where}: predicate must be a mapping, got {raw!r}")
    compound = [k for k in ("and", "or") if k in raw]
    if compound:
        if len(raw) != 1:
            raise CriteriaError(f"{where}: '{compound[0]}' must be the only key of its predicate")
        parts = raw[compound[0]]
        if not isinstance(parts, list) or not parts:
            raise CriteriaError(f"{where}: '{compound[0]}' needs a non-empty list")
        return Compound(compound[0], tuple(
            _parse_predicate(p, f"{where}.{compound[0]}[{i}]") for i, p in enumerate(parts)))

    element = raw.get("element")
    if element not in ALL_ELEMENTS:
        raise CriteriaError(f"{where}: unknown element {element!r}")
    ops = [k for k in raw if k in _LEAF_OPS]
    extra = set(raw) - set(_LEAF_OPS) - {"element", "placeholder"}
    if len(ops) != 1 or extra:
        raise CriteriaError(f"{where}: leaf needs exactly one of {', '.join(_LEAF_OPS)}"
                            + (f"; unexpected keys {sorted(extra)}" if extra else ""))
    op = ops[0]
    value = raw[op]
    placeholder = bool(raw.get("placeholder", False))

    if op in ("present", "absent"):
        if element not in PRESENCE_ELEMENTS:
            raise CriteriaError(f"{where}: '{op}' applies to presence elements, not {element!r}")
        if value is not True:
            raise CriteriaError(f"{where}: write '{op}: true'")
        return Leaf(element, op, None, placeholder)
    if element in PRESENCE_ELEMENTS:
        raise CriteriaError(f"{where}: {element!r} is a presence element; use present/absent")
    if op == "count_gte" and element not in COUNT_ELEMENTS:
        raise CriteriaError(f"{where}: count_gte applies to count elements, not {element!r}")
    if op == "between":
        if not isinstance(value, list) or len(value) != 2:
            raise CriteriaError(f"{where}: between needs [low, high]")
        lo, hi = (_number(v, where) for v in value)
        if lo > hi:
            raise CriteriaError(f"{where}: between bounds reversed ({lo:g} > {hi:g})")
        return Leaf(element, op, (lo, hi), placeholder)
    return Leaf(element, op, _number(value, where), placeholder)


def _parse_enum(enum, raw, default, where):
    if raw is None:
        return default
    try:
        return enum(raw)
    except ValueError:
        allowed = ", ".join(e.value for e in enum)
        raise CriteriaError(f"{where}: {raw!r} is not one of {allowed}") from None


def parse_criteria_data(data: Any, origin: str = "<criteria>") -> CriteriaSet:
    if not isinstance(data, dict) or not isinstance(data.get("criteria"), list):
        raise CriteriaError(f"{origin}: expected a mapping with a 'criteria' list")
    criteria = []
    seen = set()
    for i, raw in enumerate(data["criteria"]):
        where = f"{origin}: criteria[{i}]"
        if not isinstance(raw, dict):
            raise CriteriaError(f"{where}: entry must be a mapping")
        cid = raw.get("id")
        if not isinstance(cid, str) or not cid:
            raise CriteriaError(f"{where}: missing id")
        where = f"{where} ({cid})"
        if cid in seen:
            raise CriteriaError(f"{where}: duplicate id")
        seen.add(cid)
        if "predicate" not in raw:
            raise CriteriaError(f"{where}: missing predicate")
        sources = raw.get("sources") or []
        if not isinstance(sources, list):
            raise CriteriaError(f"{where}: sources must be a list")
        if raw.get("kind") is None:
            raise CriteriaError(f"{where}: missing kind (inclusion or exclusion)")
        criteria.append(Criterion(
            id=cid,
            kind=_parse_enum(Kind, raw["kind"], None, f"{where}.kind"),
            predicate=_parse_predicate(raw["predicate"], f"{where}.predicate"),
            sources=tuple(_parse_enum(ReportKind, s, None, f"{where}.sources") for s in sources),
            on_missing=_parse_enum(Policy, raw.get("on_missing"), Policy.WARN, f"{where}.on_missing"),
            on_ambiguous=_parse_enum(Policy, raw.get("on_ambiguous"), Policy.WARN, f"{where}.on_ambiguous"),
            label=str(raw.get("label", cid)),
        ))
    return CriteriaSet(tuple(criteria))


def parse_criteria(path: str | Path) -> CriteriaSet:
    """Load and validate a YAML criteria file; order is evaluation order."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CriteriaError(f"cannot read {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise CriteriaError(f"{path}: invalid YAML: {exc}") from exc
    return parse_criteria_data(data, str(path))


def default_criteria_path() -> Path:
    from importlib import resources
    return Path(str(resources.files("trialscreen") / "data" / "criteria" / "paragon_subset.yaml"))


# ------------------------------------------------------------------- profile

@dataclass
class ProfileConfig:
    threshold: float = DEFAULT_THRESHOLD
    as_of: Optional[date] = None
    routing: dict = field(default_factory=lambda: dict(DEFAULT_ROUTING))
    window: int = DEFAULT_WINDOW


@dataclass(frozen=True)
class PatientProfile:
    patient_id: str
    numeric: dict[str, Optional[Fact]]
    lvef: Optional[LvefFinding]
    presence: dict[str, Optional[PresenceFinding]]
    lvef_misses: int = 0

    def get(self, element: str):
        if element == LVEF_ELEMENT:
            return self.lvef
        if element in self.numeric:
            return self.numeric[element]
        return self.presence.get(element)


def build_profile(record: PatientRecord, lexicons: Lexicons,
                  config: Optional[ProfileConfig] = None) -> PatientProfile:
    config = config or ProfileConfig()
    facts = extract_structured_values(record)
    numeric = {e: latest_value(facts, e) for e in NUMERIC_ELEMENTS if e not in COUNT_ELEMENTS}
    has_meds = any(r.kind is ReportKind.MEDICATION for r in record.reports)
    numeric["antihypertensive_class_count"] = (
        antihypertensive_class_count(record, lexicons.drugs, config.as_of) if has_meds else None)

    lvef, misses = resolve_with_misses(record, config.threshold)

    presence: dict[str, Optional[PresenceFinding]] = {}
    for element in PRESENCE_ELEMENTS:
        kinds = config.routing.get(element, DEFAULT_ROUTING[element])
        if not record.reports_of(kinds):
            presence[element] = None
        else:
            presence[element] = element_present(record, element, kinds, lexicons.terms,
                                                lexicons.triggers, config.window)
    return PatientProfile(record.patient_id, numeric, lvef, presence, misses)


# ---------------------------------------------------------------- evaluation

@dataclass(frozen=True)
class CriterionOutcome:
    criterion_id: str
    status: Status
    evidence: tuple[str, ...] = ()
    note: str = ""

    def to_dict(self) -> dict:
        return {"criterion": self.criterion_id, "status": self.status.value,
                "evidence": list(self.evidence), "note": self.note}


@dataclass(frozen=True)
class ScreeningDecision:
    patient_id: str
    verdict: Verdict
    outcomes: tuple[CriterionOutcome, ...]
    first_discard_reason: Optional[str] = None

    @property
    def warnings(self) -> list[str]:
        return [f"{o.criterion_id}: {o.note}" for o in self.outcomes if o.status is Status.WARNING]

    @property
    def screened_in(self) -> bool:
        return self.verdict is not Verdict.EXCLUDED

    def to_dict(self) -> dict:
        return {
            "patient_id": self.patient_id,
            "verdict": self.verdict.value,
            "first_discard_reason": self.first_discard_reason,
            "warnings": self.warnings,
            "outcomes": [o.to_dict() for o in self.outcomes],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScreeningDecision":
        outcomes = tuple(
            CriterionOutcome(o["criterion"], Status(o["status"]), tuple(o.get("evidence", ())), o.get("note", ""))
            for o in data.get("outcomes", ()))
        return cls(data["patient_id"], Verdict(data["verdict"]), outcomes, data.get("first_discard_reason"))


def _truth(flag: bool) -> Truth:
    return Truth.TRUE if flag else Truth.FALSE


def _compare(value: float, op: str, target) -> bool:
    if op in ("gte", "count_gte"):
        return value >= target
    if op == "lte":
        return value <= target
    lo, hi = target
    return lo <= value <= hi


def _lvef_truth(finding: LvefFinding, op: str, target) -> Truth:
    if op == "between":
        lo, hi = target
        parts = [_lvef_truth(finding, "gte", lo), _lvef_truth(finding, "lte", hi)]
        return _combine("and", parts)
    m = finding.mention
    if m.form is Form.NUMERIC:
        return _truth(_compare(m.value, op, target))
    if m.form is Form.RANGE:
        low, high = m.value
        if op == "gte":
            return Truth.TRUE if low >= target else Truth.FALSE if high < target else Truth.AMBIGUOUS
        return Truth.TRUE if high <= target else Truth.FALSE if low > target else Truth.AMBIGUOUS
    relation = relation_to_threshold(m, target)
    if relation is Relation.INDETERMINATE:
        return Truth.AMBIGUOUS
    above = relation is Relation.AT_OR_ABOVE
    return _truth(above if op == "gte" else not above)


def _combine(op: str, parts: Sequence[Truth]) -> Truth:
    decisive, neutral = (Truth.FALSE, Truth.TRUE) if op == "and" else (Truth.TRUE, Truth.FALSE)
    if decisive in parts:
        return decisive
    if all(p is neutral for p in parts):
        return neutral
    return Truth.AMBIGUOUS if Truth.AMBIGUOUS in parts else Truth.MISSING


def _eval(p: Predicate, profile: PatientProfile, evidence: list, notes: list) -> Truth:
    if isinstance(p, Compound):
        return _combine(p.op, [_eval(part, profile, evidence, notes) for part in p.parts])

    value = profile.get(p.element)
    if value is None:
        if p.element == LVEF_ELEMENT and profile.lvef_misses:
            notes.append(f"lvef missing ({profile.lvef_misses} unreadable LVEF sentence(s))")
        else:
            notes.append(f"{p.element} missing")
        return Truth.MISSING

    if isinstance(value, PresenceFinding):
        evidence.extend(value.evidence)
        if value.present:
            result = Truth.TRUE if p.op == "present" else Truth.FALSE
        elif value.ambiguous:
            notes.append(f"{p.element} mentioned only in screening, hypothetical or ambiguous terms")
            return Truth.AMBIGUOUS
        else:
            result = Truth.FALSE if p.op == "present" else Truth.TRUE
        return result

    if isinstance(value, LvefFinding):
        m = value.mention
        evidence.append(f"{m.report_id}:{m.sentence.start}-{m.sentence.end}")
        result = _lvef_truth(value, p.op, p.value)
        if result is Truth.AMBIGUOUS:
            notes.append(f"lvef {m.form.value} {m.value_str()} is inconclusive for {p.describe()}")
        return result

    evidence.append(value.provenance)
    if not value.plausible:
        notes.append(f"{p.element} value {value.value:g} {value.unit} outside plausible range")
        return Truth.AMBIGUOUS
    return _truth(_compare(value.value, p.op, p.value))


def _resolve(policy: Policy, kind: Kind) -> Status:
    if policy is Policy.WARN:
        return Status.WARNING
    against = policy is Policy.FAIL
    if kind is Kind.INCLUSION:
        return Status.VIOLATED if against else Status.SATISFIED
    return Status.SATISFIED if against else Status.VIOLATED


def evaluate_criterion(profile: PatientProfile, c: Criterion) -> CriterionOutcome:
    evidence: list[str] = []
    notes: list[str] = []
    truth = _eval(c.predicate, profile, evidence, notes)
    if truth is Truth.TRUE:
        status = Status.SATISFIED
    elif truth is Truth.FALSE:
        status = Status.VIOLATED
    elif truth is Truth.MISSING:
        status = _resolve(c.on_missing, c.kind)
    else:
        status = _resolve(c.on_ambiguous, c.kind)
    if truth in (Truth.TRUE, Truth.FALSE):
        notes = []
    return CriterionOutcome(c.id, status, tuple(dict.fromkeys(evidence)), "; ".join(notes))


def is_hard_exclusion(outcome: CriterionOutcome, kind: Kind) -> bool:
    if kind is Kind.INCLUSION:
        return outcome.status is Status.VIOLATED
    return outcome.status is Status.SATISFIED


def decide(patient_id: str, criteria: Sequence[Criterion], outcomes: Sequence[CriterionOutcome]) -> ScreeningDecision:
    first = next((c.id for c, o in zip(criteria, outcomes) if is_hard_exclusion(o, c.kind)), None)
    if first is not None:
        verdict = Verdict.EXCLUDED
    elif any(o.status is Status.WARNING for o in outcomes):
        verdict = Verdict.NEEDS_REVIEW
    else:
        verdict = Verdict.ELIGIBLE
    return ScreeningDecision(patient_id, verdict, tuple(outcomes), first)


def evaluate_patient(profile: PatientProfile, criteria: CriteriaSet | Sequence[Criterion]) -> ScreeningDecision:
    """Evaluate every criterion; the full trace is kept even once excluded."""
    criteria = list(criteria)
    outcomes = [evaluate_criterion(profile, c) for c in criteria]
    return decide(profile.patient_id, criteria, outcomes)
