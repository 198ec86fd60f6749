"""Section identification toolkit for clinical documents.

Segmenters (lexicon, regex, rules, LLM-prompted) find section headers,
the alignment engine grounds them to character spans, the ontology maps
surface forms to coarse categories, and the metrics module scores runs
with token-level IOB precision/recall/F1, exact match, and Jaccard
inter-annotator agreement.
"""

__version__ = "0.1.0"

from .corpus import (
    AnnotatedDocument,
    CorpusStats,
    Document,
    SectionAnnotation,
    ValidationIssue,
    corpus_stats,
    load_gold_corpus,
    save_gold_corpus,
    validate_corpus,
)
from .prediction import Prediction
from .tokenizer import Token, iob_to_spans, spans_to_iob, tokenize

__all__ = [
    "AnnotatedDocument",
    "CorpusStats",
    "Document",
    "SectionAnnotation",
    "ValidationIssue",
    "corpus_stats",
    "load_gold_corpus",
    "save_gold_corpus",
    "validate_corpus",
    "Prediction",
    "Token",
    "iob_to_spans",
    "spans_to_iob",
    "tokenize",
    "__version__",
]
