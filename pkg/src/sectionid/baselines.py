"""Non-LLM segmenters: lexicon lookup, line-pattern rules, and their hybrid.

All three work line by line and return grounded predictions (header text
plus character span). Matching is line-initial: clinical headers sit at the
start of a line in the corpora this package targets, and anchoring there
keeps false positives out of prose.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator

from .corpus import Document
from .errors import InvalidPattern
from .prediction import Prediction
from .tokenizer import tokenize

log = logging.getLogger(__name__)

# Lowercase words allowed inside an otherwise Title-Case header phrase.
_MINOR_WORDS = {
    "a", "an", "and", "as", "at", "by", "for", "from", "in", "of",
    "on", "or", "per", "the", "to", "with",
}


@dataclass
class HeaderLexicon:
    entries: set[str]
    case_sensitive: bool = False

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("lexicon must contain at least one entry")
        if any(not e.strip() for e in self.entries):
            raise ValueError("lexicon entries must not be whitespace-only")


def load_lexicon(path: str | Path, case_sensitive: bool = False) -> HeaderLexicon:
    """Read a lexicon file: one surface form per line, '#' starts a comment."""
    entries: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            form = line.split("#", 1)[0].strip()
            if form:
                entries.add(form)
    return HeaderLexicon(entries=entries, case_sensitive=case_sensitive)


MatchFn = Callable[[str, "RuleConfig"], "tuple[int, int] | None"]


@dataclass
class Rule:
    """A named per-line matcher; returns a (start, end) slice of the line or None."""

    name: str
    matcher: MatchFn
    pattern: str | None = None


def _is_header_word(word: str) -> bool:
    if word.lower() in _MINOR_WORDS:
        return True
    first = word[0]
    return first.isupper() or first.isdigit() or word.isupper()


def _match_titlecase_colon(line: str, config: RuleConfig) -> tuple[int, int] | None:
    # Line-initial Title-Case or ALL-CAPS phrase ending in ':'.
    stripped = line.lstrip()
    offset = len(line) - len(stripped)
    colon = stripped.find(":")
    if colon <= 0:
        return None
    phrase = stripped[:colon].rstrip()
    if not phrase or not any(c.isalpha() for c in phrase):
        return None
    words = [t.text for t in tokenize(phrase) if t.text[0].isalnum()]
    if not words or len(words) > config.max_header_tokens:
        return None
    if words[0].lower() in _MINOR_WORDS and not words[0][0].isupper():
        return None
    if not all(_is_header_word(w) for w in words):
        return None
    return (offset, offset + len(phrase))


def _match_allcaps_line(line: str, config: RuleConfig) -> tuple[int, int] | None:
    # The entire line is ALL-CAPS and short enough to be a header.
    stripped = line.strip()
    if not stripped or not any(c.isalpha() for c in stripped):
        return None
    if stripped != stripped.upper():
        return None
    words = [t.text for t in tokenize(stripped) if t.text[0].isalnum()]
    if not words or len(words) > config.max_header_tokens:
        return None
    offset = len(line) - len(line.lstrip())
    return (offset, offset + len(stripped))


def _regex_rule(name: str, pattern: str) -> Rule:
    try:
        compiled = re.compile(pattern)
    except re.error as exc:
        raise InvalidPattern(f"rule {name!r}: {exc}") from exc

    def match(line: str, config: RuleConfig) -> tuple[int, int] | None:
        m = compiled.match(line) if config.require_line_start else compiled.search(line)
        if m is None:
            return None
        group = 1 if compiled.groups else 0
        start, end = m.span(group)
        if start == end:
            return None
        return (start, end)

    return Rule(name=name, matcher=match, pattern=pattern)


def default_rules() -> list[Rule]:
    return [
        Rule("titlecase_colon", _match_titlecase_colon),
        Rule("allcaps_line", _match_allcaps_line),
    ]


@dataclass
class RuleConfig:
    patterns: list[Rule] = field(default_factory=default_rules)
    max_header_tokens: int = 8
    require_line_start: bool = True

    def __post_init__(self) -> None:
        if not self.patterns:
            raise ValueError("rule config needs at least one pattern")
        if self.max_header_tokens < 1:
            raise ValueError("max_header_tokens must be >= 1")


def load_ruleset(path: str | Path, **kwargs: object) -> RuleConfig:
    """Read a JSON list of {"name": str, "pattern": str} rules."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, list):
        raise InvalidPattern("ruleset file must be a JSON list of {name, pattern} objects")
    rules = []
    for item in raw:
        if not isinstance(item, dict) or "name" not in item or "pattern" not in item:
            raise InvalidPattern("each rule needs 'name' and 'pattern'")
        rules.append(_regex_rule(str(item["name"]), str(item["pattern"])))
    return RuleConfig(patterns=rules, **kwargs)  # type: ignore[arg-type]


def _iter_lines(text: str) -> Iterator[tuple[int, str]]:
    """Yield (absolute offset, line content) for each newline-delimited line."""
    pos = 0
    for line in text.split("\n"):
        yield pos, line
        pos += len(line) + 1


def keyword_segment(doc: Document, lexicon: HeaderLexicon) -> Prediction:
    """Match lexicon entries at line starts, longest entry first.

    An entry matches when the line (after indentation) begins with it and
    the next character, if any, is not alphanumeric, so 'Plan' never fires
    inside 'Planning'. At most one match per line.
    """
    ordered = sorted(lexicon.entries, key=lambda e: (-len(e), e))
    fold = (lambda s: s) if lexicon.case_sensitive else str.lower
    folded = [(entry, fold(entry)) for entry in ordered]
    headers: list[str] = []
    spans: list[tuple[int, int]] = []
    for line_start, line in _iter_lines(doc.text):
        content = line.lstrip()
        indent = len(line) - len(content)
        folded_content = fold(content)
        for entry, folded_entry in folded:
            if not folded_content.startswith(folded_entry):
                continue
            tail = content[len(entry):]
            if tail and tail[0].isalnum():
                continue
            start = line_start + indent
            end = start + len(entry)
            headers.append(doc.text[start:end])
            spans.append((start, end))
            break
    return Prediction(headers=headers, spans=spans)


def regex_segment(doc: Document, config: RuleConfig | None = None) -> Prediction:
    """Apply the rule list per line; the first rule that matches wins the line."""
    if config is None:
        config = RuleConfig()
    headers: list[str] = []
    spans: list[tuple[int, int]] = []
    for line_start, line in _iter_lines(doc.text):
        for rule in config.patterns:
            rel = rule.matcher(line, config)
            if rel is None:
                continue
            start, end = line_start + rel[0], line_start + rel[1]
            text = doc.text[start:end].rstrip()
            text = text[:-1].rstrip() if text.endswith(":") else text
            end = start + len(text)
            if end > start:
                headers.append(doc.text[start:end])
                spans.append((start, end))
            break
    return Prediction(headers=headers, spans=spans)


def rule_segment(
    doc: Document, lexicon: HeaderLexicon, config: RuleConfig | None = None
) -> Prediction:
    """Union of keyword and regex matches, keyword winning span-overlap ties."""
    kw = keyword_segment(doc, lexicon)
    rx = regex_segment(doc, config)
    merged: list[tuple[tuple[int, int], str]] = [
        (span, header) for span, header in zip(kw.spans or [], kw.headers)
    ]
    kw_spans = list(kw.spans or [])
    for span, header in zip(rx.spans or [], rx.headers):
        if any(span[0] < k_end and k_start < span[1] for k_start, k_end in kw_spans):
            continue
        merged.append((span, header))
    merged.sort(key=lambda item: item[0])
    return Prediction(headers=[h for _, h in merged], spans=[s for s, _ in merged])
