"""scikit-learn style wrapper around profile building and criteria evaluation."""

from __future__ import annotations

from datetime import date
from pathlib import Path
from typing import Iterable

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .engine import (PRESENCE_ELEMENTS, CriteriaSet, PatientProfile, PlaceholderError, ProfileConfig, ScreeningDecision,
                     build_profile, default_criteria_path, evaluate_patient, parse_criteria)
from .evaluation import EXCLUDED, INCLUDED, compute_metrics, score_decisions
from .lexicons import Lexicons, load_lexicons
from .lvef import DEFAULT_THRESHOLD
from .records import Cohort, PatientRecord, load_records, parse_date, parse_patient
from .terms import DEFAULT_WINDOW


def check_records(X) -> list[PatientRecord]:
    """Coerce ``X`` into a list of :class:`PatientRecord`.

    Accepts a cohort, a path to a cohort file, or an iterable of records or
    of patient dicts in the line schema. Duplicate patient ids are rejected.
    """
    if isinstance(X, Cohort):
        records = list(X.records)
    elif isinstance(X, (str, Path)):
        records = load_records(X).records
    else:
        records = []
        for item in X:
            if isinstance(item, PatientRecord):
                records.append(item)
            elif isinstance(item, dict):
                records.append(parse_patient(item)[0])
            else:
                raise TypeError(f"expected PatientRecord or dict, got {type(item).__name__}")
    ids = [r.patient_id for r in records]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ValueError(f"duplicate patient_id(s): {', '.join(dupes)}")
    return records


def _screen_chunk(records, lexicons, config, criteria):
    return [evaluate_patient(build_profile(r, lexicons, config), criteria) for r in records]


class Prescreener(BaseEstimator):
    """Rule-based trial prescreener.

    ``fit`` loads and validates the lexicons and criteria (no learning takes
    place, ``y`` is ignored). ``transform`` builds patient profiles,
    ``screen`` returns full decisions and ``predict`` gives ``"included"``
    for screened-in patients (eligible or needing review) and
    ``"excluded"`` otherwise.

    Parameters
    ----------
    criteria : path or CriteriaSet, default None
        Criteria file; the shipped default when None.
    lexicons : path or Lexicons, default None
        Lexicon directory; the shipped default when None.
    lvef_threshold : float, default None
        Cut-off for the descriptive LVEF relation in profiles. None takes
        the criteria's ``lvef gte`` value (45 if there is none). The
        criteria leaves alone decide eligibility.
    as_of : date or ISO string, default None
        Reference date for active medications; today when None.
    allow_placeholders : bool, default False
        Accept criteria whose thresholds are still marked placeholder.
    n_jobs : int, default 1
    window : int, default 6
        Assertion trigger scope in tokens.
    """

    def __init__(self, criteria=None, lexicons=None, lvef_threshold=None, as_of=None,
                 allow_placeholders=False, n_jobs=1, window=DEFAULT_WINDOW):
        self.criteria = criteria
        self.lexicons = lexicons
        self.lvef_threshold = lvef_threshold
        self.as_of = as_of
        self.allow_placeholders = allow_placeholders
        self.n_jobs = n_jobs
        self.window = window

    def fit(self, X=None, y=None):
        if isinstance(self.criteria, CriteriaSet):
            criteria = self.criteria
        else:
            criteria = parse_criteria(self.criteria or default_criteria_path())
        if not self.allow_placeholders and criteria.placeholders():
            raise PlaceholderError(criteria.placeholders())
        lexicons = self.lexicons if isinstance(self.lexicons, Lexicons) else load_lexicons(self.lexicons)

        missing = [e for c in criteria for e in c.elements
                   if e in PRESENCE_ELEMENTS and e not in lexicons.terms.elements]
        if missing:
            raise ValueError(f"term lexicon has no synonyms for: {', '.join(sorted(set(missing)))}")

        as_of = self.as_of
        if as_of is not None and not isinstance(as_of, date):
            as_of = parse_date(as_of)
            if as_of is None:
                raise ValueError(f"as_of must be an ISO date, got {self.as_of!r}")
        self.criteria_ = criteria
        self.lexicons_ = lexicons
        threshold = self.lvef_threshold
        if threshold is None:
            threshold = criteria.lvef_threshold() or DEFAULT_THRESHOLD
        self.config_ = ProfileConfig(threshold=float(threshold), as_of=as_of or date.today(),
                                     routing=criteria.routing(), window=int(self.window))
        return self

    def transform(self, X) -> list[PatientProfile]:
        check_is_fitted(self, "criteria_")
        return [build_profile(r, self.lexicons_, self.config_) for r in check_records(X)]

    def screen(self, X) -> list[ScreeningDecision]:
        """Decisions in input order."""
        check_is_fitted(self, "criteria_")
        records = check_records(X)
        if self.n_jobs == 1 or len(records) < 2:
            return _screen_chunk(records, self.lexicons_, self.config_, self.criteria_)
        n_chunks = max(1, min(len(records), 4 * abs(self.n_jobs)))
        size = -(-len(records) // n_chunks)
        chunks = [records[i:i + size] for i in range(0, len(records), size)]
        results = Parallel(n_jobs=self.n_jobs)(
            delayed(_screen_chunk)(chunk, self.lexicons_, self.config_, self.criteria_) for chunk in chunks)
        return [d for chunk in results for d in chunk]

    def predict(self, X) -> np.ndarray:
        return np.array([INCLUDED if d.screened_in else EXCLUDED for d in self.screen(X)])

    def score(self, X, y: Iterable[str]) -> float:
        """F1 of screened-in against gold ``included``/``excluded`` labels (0.0 if undefined)."""
        records = check_records(X)
        gold = dict(zip((r.patient_id for r in records), y))
        f1 = compute_metrics(score_decisions(self.screen(records), gold)).f1
        return float(f1) if f1 is not None else 0.0
