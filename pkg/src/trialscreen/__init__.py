"""Rule-based extraction and eligibility prescreening over patient records."""

from .engine import (CriteriaSet, Criterion, PatientProfile, ScreeningDecision, build_profile,
                     evaluate_criterion, evaluate_patient, parse_criteria)
from .estimator import Prescreener, check_records
from .evaluation import ConfusionMatrix, Metrics, compute_metrics, score_decisions, tally_discards
from .lexicons import classify_drug, load_lexicons
from .lvef import extract_lvef_value, resolve_lvef, select_lvef_sentences
from .normalizer import count_drug_classes, extract_structured_values, latest_value
from .records import PatientRecord, Report, load_records, validate_record
from .terms import assert_status, element_present, find_mentions, generate_term_patterns

__all__ = [
    "ConfusionMatrix", "CriteriaSet", "Criterion", "Metrics", "PatientProfile", "PatientRecord",
    "Prescreener", "Report", "ScreeningDecision", "assert_status", "build_profile", "check_records",
    "classify_drug", "compute_metrics", "count_drug_classes", "element_present", "evaluate_criterion",
    "evaluate_patient", "extract_lvef_value", "extract_structured_values", "find_mentions",
    "generate_term_patterns", "latest_value", "load_lexicons", "load_records", "parse_criteria",
    "resolve_lvef", "score_decisions", "select_lvef_sentences", "tally_discards", "validate_record",
]
