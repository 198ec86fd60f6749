"""Edit-distance primitives used by alignment and ontology lookup."""

from __future__ import annotations


def levenshtein(a: str, b: str) -> int:
    """Classic Levenshtein distance (unit-cost insert/delete/substitute)."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        row = [i]
        for j, cb in enumerate(b, 1):
            cost = 0 if ca == cb else 1
            row.append(min(row[-1] + 1, prev[j] + 1, prev[j - 1] + cost))
        prev = row
    return prev[-1]


def edit_ratio(a: str, b: str) -> float:
    """Levenshtein distance normalized by the longer string; 0.0 for two empties."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 0.0
    return levenshtein(a, b) / longest


def prefix_distances(needle: str, haystack: str) -> list[int]:
    """Distance from needle to every prefix of haystack.

    Returns row[k] == levenshtein(needle, haystack[:k]) for k in 0..len(haystack),
    computed in one DP pass so a caller can scan all prefix lengths cheaply.
    """
    prev = list(range(len(haystack) + 1))
    for i, ca in enumerate(needle, 1):
        row = [i]
        for j, cb in enumerate(haystack, 1):
            cost = 0 if ca == cb else 1
            row.append(min(row[-1] + 1, prev[j] + 1, prev[j - 1] + cost))
        prev = row
    return prev
