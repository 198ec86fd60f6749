"""Gold corpus loading, validation, serialization, and summary statistics.

The interchange format is UTF-8 JSONL, one document object per line:

    {"id": str, "text": str, "source_kind": "ehr_clean"|"ocr_noisy",
     "sections": [{"label": str, "header_span": [int, int],
                   "body_span": [int, int]}]}

``source_kind`` defaults to ``ehr_clean`` and ``body_span`` is optional.
All offsets are Unicode character offsets into ``text``, end-exclusive.
A ``raw_header`` field per section is accepted (and written back) as a
cross-check; when present it must equal the text slice at ``header_span``.
"""

from __future__ import annotations

import json
import logging
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

from .errors import EmptyCorpus, FormatError, SpanError
from .tokenizer import Token, tokenize

log = logging.getLogger(__name__)

SOURCE_KINDS = ("ehr_clean", "ocr_noisy")

DUPLICATE_ID = "duplicate_id"
OUT_OF_BOUNDS = "out_of_bounds"
SUBSTRING_MISMATCH = "substring_mismatch"
OVERLAPPING_SPANS = "overlapping_spans"
UNSORTED_SECTIONS = "unsorted_sections"
BODY_SPAN_INVALID = "body_span_invalid"


@dataclass
class Document:
    id: str
    text: str
    source_kind: str = "ehr_clean"


@dataclass
class SectionAnnotation:
    label: str
    header_span: tuple[int, int]
    raw_header: str
    body_span: tuple[int, int] | None = None


@dataclass
class AnnotatedDocument:
    document: Document
    sections: list[SectionAnnotation] = field(default_factory=list)

    @property
    def id(self) -> str:
        return self.document.id

    @property
    def text(self) -> str:
        return self.document.text

    def header_spans(self) -> list[tuple[int, int]]:
        return [s.header_span for s in self.sections]

    def header_texts(self) -> list[str]:
        return [s.raw_header for s in self.sections]


@dataclass
class CorpusStats:
    document_count: int
    mean_token_length: float
    stddev_token_length: float
    mean_sections_per_doc: float
    stddev_sections_per_doc: float


@dataclass
class ValidationIssue:
    kind: str
    doc_id: str | None
    message: str


def _section_problems(
    text: str, label: str, header_span: tuple[int, int], body_span: tuple[int, int] | None,
    raw_header: str | None, next_header_start: int | None,
) -> tuple[str, str] | None:
    """Return (issue_kind, message) for the first violated invariant, else None."""
    start, end = header_span
    if not (0 <= start < end <= len(text)):
        return OUT_OF_BOUNDS, f"header_span ({start}, {end}) outside text of length {len(text)}"
    if raw_header is not None and text[start:end] != raw_header:
        return SUBSTRING_MISMATCH, (
            f"raw_header {raw_header!r} != text slice {text[start:end]!r} at ({start}, {end})"
        )
    if body_span is not None:
        b_start, b_end = body_span
        if not (0 <= b_start < b_end <= len(text)):
            return BODY_SPAN_INVALID, f"body_span ({b_start}, {b_end}) outside text"
        if b_start < end:
            return BODY_SPAN_INVALID, f"body_span starts at {b_start} before header end {end}"
        if next_header_start is not None and b_end > next_header_start:
            return BODY_SPAN_INVALID, (
                f"body_span ends at {b_end} past next header start {next_header_start}"
            )
    return None


def _parse_span(value: object, what: str, lineno: int) -> tuple[int, int]:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(v, int) and not isinstance(v, bool) for v in value)
    ):
        raise FormatError(f"line {lineno}: {what} must be a [start, end] pair of ints")
    return (value[0], value[1])


def load_gold_corpus(path: str | Path, strict: bool = True) -> list[AnnotatedDocument]:
    """Load an annotated corpus from JSONL.

    In strict mode any invariant violation raises (FormatError for malformed
    lines and fields, SpanError for span problems, naming the document). In
    lenient mode violating sections are dropped with a logged warning, but
    documents themselves are always kept.
    """
    path = Path(path)
    docs: list[AnnotatedDocument] = []
    seen_ids: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                if strict:
                    raise FormatError(f"line {lineno}: malformed JSON: {exc}") from exc
                log.warning("%s line %d: skipping malformed JSON line", path, lineno)
                continue
            if not isinstance(obj, dict):
                raise FormatError(f"line {lineno}: expected a JSON object")
            doc_id = obj.get("id")
            text = obj.get("text")
            if not isinstance(doc_id, str) or not doc_id:
                raise FormatError(f"line {lineno}: 'id' must be a non-empty string")
            if not isinstance(text, str):
                raise FormatError(f"line {lineno}: 'text' must be a string")
            source_kind = obj.get("source_kind", "ehr_clean")
            if source_kind not in SOURCE_KINDS:
                if strict:
                    raise FormatError(
                        f"line {lineno}: unknown source_kind {source_kind!r} for document {doc_id!r}"
                    )
                log.warning("document %s: unknown source_kind %r, using ehr_clean", doc_id, source_kind)
                source_kind = "ehr_clean"
            if doc_id in seen_ids:
                if strict:
                    raise FormatError(f"line {lineno}: duplicate document id {doc_id!r}")
                log.warning("duplicate document id %r kept in lenient mode", doc_id)
            seen_ids.add(doc_id)

            raw_sections = obj.get("sections", [])
            if not isinstance(raw_sections, list):
                raise FormatError(f"line {lineno}: 'sections' must be a list")
            sections: list[SectionAnnotation] = []
            prev_end = 0
            for raw in raw_sections:
                if not isinstance(raw, dict) or "label" not in raw or "header_span" not in raw:
                    raise FormatError(
                        f"line {lineno}: section needs 'label' and 'header_span' (document {doc_id!r})"
                    )
                header_span = _parse_span(raw["header_span"], "header_span", lineno)
                body_span = (
                    _parse_span(raw["body_span"], "body_span", lineno)
                    if raw.get("body_span") is not None
                    else None
                )
                problem = _section_problems(
                    text, raw["label"], header_span, body_span,
                    raw.get("raw_header"), next_header_start=None,
                )
                if problem is None and header_span[0] < prev_end:
                    problem = (
                        OVERLAPPING_SPANS,
                        f"header_span {header_span} overlaps or precedes previous header end {prev_end}",
                    )
                if problem is not None:
                    kind, message = problem
                    if kind == BODY_SPAN_INVALID:
                        # body problems never discard the header annotation
                        if strict:
                            raise SpanError(f"document {doc_id!r}: {message}")
                        log.warning("document %s: dropping body_span: %s", doc_id, message)
                        body_span = None
                    else:
                        if strict:
                            raise SpanError(f"document {doc_id!r}: {message}")
                        log.warning("document %s: dropping section: %s", doc_id, message)
                        continue
                sections.append(
                    SectionAnnotation(
                        label=str(raw["label"]),
                        header_span=header_span,
                        raw_header=text[header_span[0]:header_span[1]],
                        body_span=body_span,
                    )
                )
                prev_end = header_span[1]
            for sec, nxt in zip(sections, sections[1:]):
                if sec.body_span is not None and sec.body_span[1] > nxt.header_span[0]:
                    message = (
                        f"body_span {sec.body_span} of {sec.label!r} runs past the "
                        f"next header at {nxt.header_span[0]}"
                    )
                    if strict:
                        raise SpanError(f"document {doc_id!r}: {message}")
                    log.warning("document %s: dropping body_span: %s", doc_id, message)
                    sec.body_span = None
            docs.append(AnnotatedDocument(Document(doc_id, text, source_kind), sections))
    return docs


def save_gold_corpus(docs: Iterable[AnnotatedDocument], path: str | Path) -> None:
    """Write documents back to the JSONL interchange format."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            sections = []
            for sec in doc.sections:
                entry: dict[str, object] = {
                    "label": sec.label,
                    "header_span": list(sec.header_span),
                    "raw_header": sec.raw_header,
                }
                if sec.body_span is not None:
                    entry["body_span"] = list(sec.body_span)
                sections.append(entry)
            record = {
                "id": doc.document.id,
                "text": doc.document.text,
                "source_kind": doc.document.source_kind,
                "sections": sections,
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def validate_corpus(docs: list[AnnotatedDocument]) -> list[ValidationIssue]:
    """Diagnose invariant violations without raising.

    Returns one issue per violation; an empty list means the corpus is valid.
    """
    issues: list[ValidationIssue] = []
    seen: set[str] = set()
    for doc in docs:
        if doc.id in seen:
            issues.append(ValidationIssue(DUPLICATE_ID, doc.id, f"document id {doc.id!r} repeats"))
        seen.add(doc.id)
        prev_start = -1
        prev_end = 0
        ordered = True
        for i, sec in enumerate(doc.sections):
            next_start = (
                doc.sections[i + 1].header_span[0] if i + 1 < len(doc.sections) else None
            )
            problem = _section_problems(
                doc.text, sec.label, sec.header_span, sec.body_span, sec.raw_header, next_start
            )
            if problem is not None:
                issues.append(ValidationIssue(problem[0], doc.id, problem[1]))
                continue
            start, end = sec.header_span
            if start < prev_start:
                issues.append(
                    ValidationIssue(
                        UNSORTED_SECTIONS, doc.id,
                        f"section {i} starts at {start}, before previous start {prev_start}",
                    )
                )
                ordered = False
            elif ordered and start < prev_end:
                issues.append(
                    ValidationIssue(
                        OVERLAPPING_SPANS, doc.id,
                        f"section {i} at ({start}, {end}) overlaps previous header",
                    )
                )
            prev_start, prev_end = start, max(prev_end, end)
    return issues


def corpus_stats(
    docs: list[AnnotatedDocument],
    tokenizer: Callable[[str], list[Token]] = tokenize,
) -> CorpusStats:
    """Mean and population standard deviation of tokens and sections per document."""
    if not docs:
        raise EmptyCorpus("corpus_stats needs at least one document")
    token_counts = [len(tokenizer(doc.text)) for doc in docs]
    section_counts = [len(doc.sections) for doc in docs]
    return CorpusStats(
        document_count=len(docs),
        mean_token_length=statistics.fmean(token_counts),
        stddev_token_length=statistics.pstdev(token_counts),
        mean_sections_per_doc=statistics.fmean(section_counts),
        stddev_sections_per_doc=statistics.pstdev(section_counts),
    )
