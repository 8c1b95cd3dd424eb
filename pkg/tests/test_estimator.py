import sys
from pathlib import Path

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from trialscreen.engine import PlaceholderError, default_criteria_path, parse_criteria
from trialscreen.estimator import Prescreener, check_records
from trialscreen.lexicons import load_lexicons

sys.path.insert(0, str(Path(__file__).parent))
from cohort_cases import AS_OF, CASES, gold_labels, records  # noqa: E402


def screener(**kw):
    return Prescreener(allow_placeholders=True, as_of=AS_OF, **kw).fit()


def test_params_and_clone():
    est = Prescreener(lvef_threshold=50, n_jobs=2)
    params = est.get_params()
    assert params["lvef_threshold"] == 50 and params["n_jobs"] == 2
    twin = clone(est)
    assert twin.get_params() == params
    twin.set_params(window=4)
    assert twin.window == 4 and est.window == 6


def test_unfitted():
    with pytest.raises(NotFittedError):
        Prescreener().predict(records())


def test_placeholders_block_fit():
    with pytest.raises(PlaceholderError) as err:
        Prescreener().fit()
    assert any("age_bmi" in p for p in err.value.placeholders)


def test_bad_as_of():
    with pytest.raises(ValueError):
        Prescreener(allow_placeholders=True, as_of="June").fit()


def test_missing_term_element(tmp_path):
    lex = load_lexicons()
    terms = type(lex.terms)({k: v for k, v in lex.terms.elements.items() if k != "malignancy"})
    with pytest.raises(ValueError, match="malignancy"):
        Prescreener(allow_placeholders=True, lexicons=type(lex)(lex.drugs, terms, lex.triggers)).fit()


def test_predict_and_score():
    est = screener()
    y = est.predict(records())
    assert isinstance(y, np.ndarray) and len(y) == len(CASES)
    expected = ["excluded" if c.verdict == "excluded" else "included" for c in CASES]
    assert list(y) == expected
    gold = gold_labels()
    assert est.score(records(), [gold[c.pid] for c in CASES]) == 1.0


def test_parallel_matches_serial():
    serial = screener().screen(records())
    parallel = screener(n_jobs=2).screen(records())
    assert [d.to_dict() for d in serial] == [d.to_dict() for d in parallel]


def test_transform_returns_profiles():
    profiles = screener().transform(records()[:3])
    assert [p.patient_id for p in profiles] == [c.pid for c in CASES[:3]]


def test_threshold_defaults_to_criteria():
    crit = parse_criteria(default_criteria_path())
    assert Prescreener(criteria=crit, allow_placeholders=True).fit().config_.threshold == 45.0
    est = Prescreener(criteria=crit, allow_placeholders=True, as_of=AS_OF, lvef_threshold=65).fit()
    assert est.config_.threshold == 65.0
    profile = est.transform(records()[:1])[0]
    assert profile.lvef.relation.value == "below"
    # the criteria leaf still decides: 60% passes its own gte 45
    assert est.screen(records()[:1])[0].verdict.value == "eligible"


def test_check_records_rejects_duplicates():
    rec = records()[0]
    with pytest.raises(ValueError, match="duplicate"):
        check_records([rec, rec])
    with pytest.raises(TypeError):
        check_records([42])
