"""Map LEGO corpus dialog-act labels onto ISO 24617-2 communicative functions."""

__version__ = "0.1.0"

from .corpus import Corpus, Dialog, Turn, label_histogram, parse_corpus, read_corpus, validate_corpus
from .emitter import EmissionOptions, emit, parse_annotated_jsonl
from .mapping import (
    AnnotatedTurn,
    FunctionAssignment,
    OverrideEntry,
    RuleTable,
    apply_overrides,
    load_overrides,
    load_rules,
    map_corpus,
    map_system_label,
    map_user_label,
)
from .stats import compare_report, function_distribution, load_expected
from .taxonomy import Dimension, Taxonomy, load_taxonomy

__all__ = [
    "AnnotatedTurn", "Corpus", "Dialog", "Dimension", "EmissionOptions", "FunctionAssignment",
    "OverrideEntry", "RuleTable", "Taxonomy", "Turn", "apply_overrides", "compare_report", "emit",
    "function_distribution", "label_histogram", "load_expected", "load_overrides", "load_rules",
    "load_taxonomy", "map_corpus", "map_system_label", "map_user_label", "parse_annotated_jsonl",
    "parse_corpus", "read_corpus", "validate_corpus",
]
