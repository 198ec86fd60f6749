"""Scoring: token-level IOB metrics, exact match, Jaccard agreement, full runs.

Conventions, chosen so every number is recomputable from the reported counts:

* Precision is 1.0 when no header tokens were predicted, recall 1.0 when the
  gold side has none. F1 is the harmonic mean, 0 when P + R == 0.
* ``accuracy`` is recall restricted to gold header tokens carrying the
  correct B/I role; ``accuracy_all_tokens`` is plain positional agreement
  over every token and is reported alongside.
* Exact match is per gold header: the fraction of gold headers whose
  normalized surface form is produced by the system, matched one-to-one.
* Corpus aggregation is micro (summed counts) for token metrics and macro
  (mean of per-document values) for exact match.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping, Sequence

from .align import align_headers
from .corpus import AnnotatedDocument
from .errors import EmptyInput, LengthMismatch, MalformedTags
from .ontology import Ontology, categorize, normalize_surface
from .prediction import Prediction
from .tokenizer import O, is_well_formed, spans_to_iob, tokenize


@dataclass
class Counts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    gold_tokens: int = 0
    pred_tokens: int = 0
    gold_headers: int = 0
    matched_exact: int = 0
    role_correct: int = 0
    total_tokens: int = 0
    equal_tokens: int = 0

    def add(self, other: "Counts") -> None:
        for name in self.__dataclass_fields__:
            setattr(self, name, getattr(self, name) + getattr(other, name))


@dataclass
class TokenMetrics:
    precision: float
    recall: float
    f1: float
    accuracy: float
    accuracy_all_tokens: float
    counts: Counts


@dataclass
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    em: float
    accuracy_all_tokens: float
    counts: Counts


@dataclass
class DocScore:
    doc_id: str
    precision: float
    recall: float
    f1: float
    accuracy: float
    em: float
    counts: Counts
    unmatched_headers: list[str] = field(default_factory=list)


@dataclass
class RunReport:
    method: str
    corpus: str
    report: MetricsReport
    per_doc: list[DocScore]


def _rates(counts: Counts) -> tuple[float, float, float, float, float]:
    precision = counts.tp / counts.pred_tokens if counts.pred_tokens else 1.0
    recall = counts.tp / counts.gold_tokens if counts.gold_tokens else 1.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    accuracy = counts.role_correct / counts.gold_tokens if counts.gold_tokens else 1.0
    accuracy_all = counts.equal_tokens / counts.total_tokens if counts.total_tokens else 1.0
    return precision, recall, f1, accuracy, accuracy_all


def token_counts(gold_tags: Sequence[str], pred_tags: Sequence[str]) -> Counts:
    if len(gold_tags) != len(pred_tags):
        raise LengthMismatch(f"{len(gold_tags)} gold tags vs {len(pred_tags)} predicted")
    if not is_well_formed(list(gold_tags)) or not is_well_formed(list(pred_tags)):
        raise MalformedTags("tag sequences must be well-formed IOB")
    counts = Counts(total_tokens=len(gold_tags))
    for g, p in zip(gold_tags, pred_tags):
        gold_header = g != O
        pred_header = p != O
        counts.gold_tokens += gold_header
        counts.pred_tokens += pred_header
        counts.tp += gold_header and pred_header
        counts.fp += pred_header and not gold_header
        counts.fn += gold_header and not pred_header
        counts.role_correct += gold_header and g == p
        counts.equal_tokens += g == p
    return counts


def token_metrics(gold_tags: Sequence[str], pred_tags: Sequence[str]) -> TokenMetrics:
    """Precision/recall/F1/accuracy over header tokens for one document."""
    counts = token_counts(gold_tags, pred_tags)
    precision, recall, f1, accuracy, accuracy_all = _rates(counts)
    return TokenMetrics(precision, recall, f1, accuracy, accuracy_all, counts)


def exact_match_count(gold_headers: Sequence[str], pred_headers: Sequence[str]) -> int:
    """Number of gold headers reproduced verbatim after normalization.

    Matching is one-to-one: each predicted header can satisfy only one gold
    header, scanned greedily in order.
    """
    remaining = [normalize_surface(p) for p in pred_headers]
    matched = 0
    for gold in gold_headers:
        norm = normalize_surface(gold)
        try:
            remaining.remove(norm)
        except ValueError:
            continue
        matched += 1
    return matched


def exact_match(gold_headers: Sequence[str], pred_headers: Sequence[str]) -> float:
    """Fraction of gold headers exactly reproduced; 1.0 when gold is empty."""
    if not gold_headers:
        return 1.0
    return exact_match_count(gold_headers, pred_headers) / len(gold_headers)


def jaccard(a: Iterable[str], b: Iterable[str]) -> float:
    """Jaccard similarity of two header-name sets over normalized surface forms."""
    set_a = {normalize_surface(x) for x in a} - {""}
    set_b = {normalize_surface(x) for x in b} - {""}
    union = set_a | set_b
    if not union:
        return 1.0
    return len(set_a & set_b) / len(union)


@dataclass
class IAAReport:
    mean_jaccard: float
    per_pair: list[tuple[str, float]]


def iaa_report(
    pairs: Sequence[tuple[Iterable[str], Iterable[str]]],
    ids: Sequence[str] | None = None,
) -> IAAReport:
    """Mean pairwise Jaccard similarity across doubly-annotated documents."""
    if not pairs:
        raise EmptyInput("iaa_report needs at least one annotation pair")
    labels = ids if ids is not None else [str(i) for i in range(len(pairs))]
    per_pair = [(label, jaccard(a, b)) for label, (a, b) in zip(labels, pairs)]
    mean = sum(v for _, v in per_pair) / len(per_pair)
    return IAAReport(mean_jaccard=mean, per_pair=per_pair)


def _close_ended_counts(
    gold_labels: Sequence[str], pred_headers: Sequence[str], ont: Ontology
) -> tuple[Counts, float]:
    gold_cats = {categorize(label, ont) for label in gold_labels}
    pred_cats = {categorize(h, ont) for h in pred_headers}
    hit = len(gold_cats & pred_cats)
    counts = Counts(
        tp=hit,
        fp=len(pred_cats - gold_cats),
        fn=len(gold_cats - pred_cats),
        gold_tokens=len(gold_cats),
        pred_tokens=len(pred_cats),
        gold_headers=len(gold_cats),
        matched_exact=hit,
        role_correct=hit,
        total_tokens=len(gold_cats | pred_cats),
        equal_tokens=hit,
    )
    em = hit / len(gold_cats) if gold_cats else 1.0
    return counts, em


def evaluate_run(
    corpus: Sequence[AnnotatedDocument],
    predictions: Mapping[str, Prediction],
    ontology: Ontology | None = None,
    *,
    method: str = "run",
    corpus_name: str = "corpus",
    max_edit_ratio: float = 0.2,
    close_ended: bool = False,
) -> RunReport:
    """Score one segmenter run against gold annotations.

    Open mode grounds each prediction (module ``align``), converts both gold
    and predicted spans to token IOB tags, and micro-averages token counts;
    exact match is macro-averaged per document. Close-ended mode instead
    compares the categorized label sets, which requires an ontology.
    Documents without a prediction are scored against an empty one.
    """
    if close_ended and ontology is None:
        raise ValueError("close-ended evaluation needs an ontology")
    total = Counts()
    per_doc: list[DocScore] = []
    em_sum = 0.0
    for doc in corpus:
        pred = predictions.get(doc.id, Prediction(headers=[]))
        if close_ended:
            assert ontology is not None
            counts, em = _close_ended_counts(
                [s.label for s in doc.sections], pred.headers, ontology
            )
            unmatched: list[str] = []
        else:
            alignment = align_headers(doc.document, pred, max_edit_ratio=max_edit_ratio)
            tokens = tokenize(doc.text)
            gold_tags = spans_to_iob(tokens, doc.header_spans())
            pred_tags = spans_to_iob(tokens, alignment.matched_spans())
            counts = token_counts(gold_tags, pred_tags)
            counts.gold_headers = len(doc.sections)
            counts.matched_exact = exact_match_count(doc.header_texts(), pred.headers)
            em = (
                counts.matched_exact / counts.gold_headers if counts.gold_headers else 1.0
            )
            unmatched = [pred.headers[i] for i in alignment.unmatched_predictions]
        precision, recall, f1, accuracy, _ = _rates(counts)
        per_doc.append(
            DocScore(doc.id, precision, recall, f1, accuracy, em, counts, unmatched)
        )
        total.add(counts)
        em_sum += em
    precision, recall, f1, accuracy, accuracy_all = _rates(total)
    em = em_sum / len(corpus) if corpus else 1.0
    report = MetricsReport(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        em=em,
        accuracy_all_tokens=accuracy_all,
        counts=total,
    )
    return RunReport(method=method, corpus=corpus_name, report=report, per_doc=per_doc)


CSV_HEADER = "method,accuracy,precision,recall,f1,em"

_TABLE_COLUMNS = ("Accuracy(%)", "Precision(%)", "Recall(%)", "F1(%)", "EM(%)")


def _pct(value: float) -> str:
    return f"{value * 100:.2f}"


def render_report(run: RunReport, fmt: str = "table_text") -> str:
    """Serialize a run report deterministically as table_text, csv, or json."""
    r = run.report
    row = [_pct(r.accuracy), _pct(r.precision), _pct(r.recall), _pct(r.f1), _pct(r.em)]
    if fmt == "csv":
        return CSV_HEADER + "\n" + ",".join([run.method] + row) + "\n"
    if fmt == "table_text":
        name_width = max(len("Method"), len(run.method))
        header = ["Method".ljust(name_width)] + [c.rjust(12) for c in _TABLE_COLUMNS]
        values = [run.method.ljust(name_width)] + [v.rjust(12) for v in row]
        return "\n".join(["  ".join(header), "  ".join(values)]) + "\n"
    if fmt == "json":
        payload = {
            "method": run.method,
            "corpus": run.corpus,
            "scores": {
                "accuracy": r.accuracy,
                "accuracy_all_tokens": r.accuracy_all_tokens,
                "precision": r.precision,
                "recall": r.recall,
                "f1": r.f1,
                "em": r.em,
            },
            "counts": asdict(r.counts),
            "per_doc": [asdict(d) for d in run.per_doc],
        }
        return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")


def report_from_json(payload: str) -> RunReport:
    """Inverse of ``render_report(..., "json")``."""
    data = json.loads(payload)
    scores = data["scores"]
    per_doc = [
        DocScore(
            doc_id=d["doc_id"],
            precision=d["precision"],
            recall=d["recall"],
            f1=d["f1"],
            accuracy=d["accuracy"],
            em=d["em"],
            counts=Counts(**d["counts"]),
            unmatched_headers=list(d["unmatched_headers"]),
        )
        for d in data["per_doc"]
    ]
    report = MetricsReport(
        accuracy=scores["accuracy"],
        precision=scores["precision"],
        recall=scores["recall"],
        f1=scores["f1"],
        em=scores["em"],
        accuracy_all_tokens=scores["accuracy_all_tokens"],
        counts=Counts(**data["counts"]),
    )
    return RunReport(
        method=data["method"], corpus=data["corpus"], report=report, per_doc=per_doc
    )
