"""Deterministic character-offset tokenization and IOB span conversion.

Tokens carry character offsets into the original text so that span-level
annotations and token-level tags can be converted back and forth without
loss. The tagger uses a single implicit HEADER class: B marks the first
token of a header span, I the rest, O everything else.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import LengthMismatch, MalformedTags, OverlapError

B = "B"
I = "I"  # noqa: E741 - conventional IOB name
O = "O"  # noqa: E741

IOB_TAGS = (B, I, O)

# Maximal alphanumeric runs, then any other non-whitespace character alone.
_TOKEN_RE = re.compile(r"[^\W_]+|[^\w\s]|_", re.UNICODE)


@dataclass(frozen=True)
class Token:
    text: str
    start: int
    end: int


def tokenize(text: str) -> list[Token]:
    """Split text into offset-carrying tokens.

    Maximal runs of alphanumeric characters form one token each; every
    other non-whitespace character is its own single-character token.
    Whitespace never appears in a token, so rejoining tokens with the
    original gaps reconstructs the text.
    """
    return [Token(m.group(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def _check_spans(spans: list[tuple[int, int]]) -> None:
    prev_end = None
    for start, end in spans:
        if start >= end:
            raise OverlapError(f"empty or inverted span ({start}, {end})")
        if prev_end is not None and start < prev_end:
            raise OverlapError(
                f"spans must be sorted and non-overlapping, got start {start} before {prev_end}"
            )
        prev_end = end


def spans_to_iob(tokens: list[Token], header_spans: list[tuple[int, int]]) -> list[str]:
    """Tag each token B/I/O against a sorted, non-overlapping span list.

    A token belongs to a span when their character ranges overlap at all,
    so spans that cut through a token still claim it. The first token of
    each span gets B, later ones I.
    """
    _check_spans(header_spans)
    tags: list[str] = []
    idx = 0
    opened = -1  # index of the span whose B we already emitted
    for tok in tokens:
        while idx < len(header_spans) and header_spans[idx][1] <= tok.start:
            idx += 1
        if idx < len(header_spans) and header_spans[idx][0] < tok.end:
            tags.append(I if opened == idx else B)
            opened = idx
        else:
            tags.append(O)
    return tags


def iob_to_spans(tokens: list[Token], tags: list[str]) -> list[tuple[int, int]]:
    """Convert a well-formed tag sequence back to character spans.

    Each maximal B,I* run becomes one span, from the run's first token
    start to its last token end.
    """
    if len(tags) != len(tokens):
        raise LengthMismatch(f"{len(tags)} tags for {len(tokens)} tokens")
    spans: list[tuple[int, int]] = []
    run_start: int | None = None
    run_end = 0
    prev = O
    for tok, tag in zip(tokens, tags):
        if tag not in IOB_TAGS:
            raise MalformedTags(f"unknown tag {tag!r}")
        if tag == I and prev == O:
            raise MalformedTags("I tag with no open span")
        if tag == B:
            if run_start is not None:
                spans.append((run_start, run_end))
            run_start = tok.start
            run_end = tok.end
        elif tag == I:
            run_end = tok.end
        else:
            if run_start is not None:
                spans.append((run_start, run_end))
                run_start = None
        prev = tag
    if run_start is not None:
        spans.append((run_start, run_end))
    return spans


def is_well_formed(tags: list[str]) -> bool:
    prev = O
    for tag in tags:
        if tag not in IOB_TAGS:
            return False
        if tag == I and prev == O:
            return False
        prev = tag
    return True
