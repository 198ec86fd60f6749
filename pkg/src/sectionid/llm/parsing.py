"""Extract header lists from model responses.

Models answer in several shapes: a JSON array of ``{"section_title": ...}``
objects, one JSON object per line, either of those inside a fenced code
block, or (close-ended runs) a bare JSON array of label strings. Everything
else around the structure is prose and gets ignored, as do ``CoT`` fields.
"""

from __future__ import annotations

import json
import re

from ..errors import ParseError

_FENCE_RE = re.compile(r"```[a-zA-Z0-9_-]*\n(.*?)```", re.DOTALL)


def _headers_from_item(item: object) -> str | None:
    if isinstance(item, str):
        return item.strip() or None
    if isinstance(item, dict):
        title = item.get("section_title")
        if isinstance(title, str) and title.strip():
            return title.strip()
    return None


def _try_json(text: str) -> list[str] | None:
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        return None
    if isinstance(value, dict):
        header = _headers_from_item(value)
        return [header] if header else []
    if isinstance(value, list):
        return [h for h in (_headers_from_item(item) for item in value) if h]
    return None


def _try_object_lines(text: str) -> list[str] | None:
    found_structure = False
    headers: list[str] = []
    for line in text.splitlines():
        line = line.strip().rstrip(",")
        if not line or line in ("[", "]"):
            continue
        if not line.startswith("{"):
            continue
        try:
            value = json.loads(line)
        except json.JSONDecodeError:
            continue
        found_structure = True
        header = _headers_from_item(value)
        if header:
            headers.append(header)
    return headers if found_structure else None


def _try_embedded_array(text: str) -> list[str] | None:
    start = text.find("[")
    while start != -1:
        depth = 0
        for i in range(start, len(text)):
            if text[i] == "[":
                depth += 1
            elif text[i] == "]":
                depth -= 1
                if depth == 0:
                    result = _try_json(text[start:i + 1])
                    if result is not None:
                        return result
                    break
        start = text.find("[", start + 1)
    return None


def _dedupe_consecutive(headers: list[str]) -> list[str]:
    out: list[str] = []
    for h in headers:
        if not out or out[-1] != h:
            out.append(h)
    return out


def parse_llm_response(raw: str) -> list[str]:
    """Pull ordered section titles out of a model response.

    Raises ParseError when no JSON structure can be found at all; an empty
    extracted list is a valid result, not an error.
    """
    candidates = [m.group(1) for m in _FENCE_RE.finditer(raw)]
    candidates.append(raw.strip())
    for candidate in candidates:
        for attempt in (_try_json, _try_object_lines, _try_embedded_array):
            result = attempt(candidate)
            if result is not None:
                return _dedupe_consecutive(result)
    raise ParseError(f"no header structure found in response of {len(raw)} chars")
