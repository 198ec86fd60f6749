"""Canonicalize free-form section names into coarse categories.

The bundled taxonomy (``data/taxonomy.csv``) maps observed real-world
section surface forms to a 25-category coarse scheme that always includes
an ``UNKNOWN`` fallback. A companion file (``data/category_counts.csv``)
ships the reference per-category counts observed when the taxonomy was
built, so the distribution can be reproduced without the source documents.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import IO, Iterable

from .corpus import AnnotatedDocument
from .errors import DanglingCategory, EmptyCorpus, FormatError
from .textdist import edit_ratio

UNKNOWN = "UNKNOWN"
COARSE = "coarse"
FINE = "fine"

DEFAULT_FUZZY_RATIO = 0.15


def data_path(name: str):
    """Importable path to a bundled data file."""
    return resources.files("sectionid").joinpath("data", name)


def _open_text(src) -> IO[str]:
    if isinstance(src, (str, Path)):
        return open(src, encoding="utf-8")
    return src.open("r", encoding="utf-8")


def normalize_surface(name: str) -> str:
    """Lowercase, collapse whitespace, and strip surrounding punctuation.

    Returns "" only when the input has no alphanumeric characters at all.
    """
    s = " ".join(name.lower().split())
    start = 0
    end = len(s)
    while start < end and not s[start].isalnum():
        start += 1
    while end > start and not s[end - 1].isalnum():
        end -= 1
    return s[start:end]


@dataclass
class Ontology:
    categories: set[str]
    surface_map: dict[str, str]
    levels: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if UNKNOWN not in self.categories:
            raise DanglingCategory(f"ontology must declare {UNKNOWN!r}")
        for surface, category in self.surface_map.items():
            if category not in self.categories:
                raise DanglingCategory(
                    f"surface {surface!r} maps to undeclared category {category!r}"
                )

    def coarse_categories(self) -> set[str]:
        fine_only = {
            self.surface_map[s] for s, lvl in self.levels.items() if lvl == FINE
        } - {self.surface_map[s] for s, lvl in self.levels.items() if lvl != FINE}
        return self.categories - fine_only


def load_ontology(path: str | Path | object | None = None) -> Ontology:
    """Parse a taxonomy CSV: ``surface_form,category,level`` with a header row.

    Categories are declared implicitly by appearing in the category column; a
    row with an empty surface form declares its category without mapping any
    surface. ``UNKNOWN`` is always added. Defaults to the bundled taxonomy.
    """
    src = data_path("taxonomy.csv") if path is None else path
    categories: set[str] = set()
    surface_map: dict[str, str] = {}
    levels: dict[str, str] = {}
    with _open_text(src) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:2]] != ["surface_form", "category"]:
            raise FormatError("taxonomy file must start with a surface_form,category,level header")
        for row_no, row in enumerate(reader, 2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < 2 or not row[1].strip():
                raise FormatError(f"taxonomy row {row_no}: missing category")
            category = row[1].strip()
            level = row[2].strip().lower() if len(row) > 2 and row[2].strip() else COARSE
            if level not in (COARSE, FINE):
                raise FormatError(f"taxonomy row {row_no}: level must be coarse or fine")
            categories.add(category)
            surface = normalize_surface(row[0])
            if not surface:
                continue  # bare category declaration
            previous = surface_map.get(surface)
            if previous is not None and previous != category:
                raise FormatError(
                    f"taxonomy row {row_no}: surface {surface!r} already maps to {previous!r}"
                )
            surface_map[surface] = category
            levels[surface] = level
    if not categories:
        raise FormatError(f"taxonomy declares no categories, not even {UNKNOWN!r}")
    categories.add(UNKNOWN)
    return Ontology(categories=categories, surface_map=surface_map, levels=levels)


def categorize(
    name: str,
    ont: Ontology,
    fuzzy: bool = True,
    max_ratio: float = DEFAULT_FUZZY_RATIO,
    level: str | None = None,
) -> str:
    """Map a section name to its canonical category, falling back to UNKNOWN.

    Exact lookup happens on the normalized surface form; with ``fuzzy`` the
    nearest surface by normalized edit distance wins when its ratio is at
    most ``max_ratio``. ``level`` restricts candidates to coarse or fine
    entries.
    """
    surface = normalize_surface(name)
    if not surface:
        return UNKNOWN

    def allowed(s: str) -> bool:
        return level is None or ont.levels.get(s, COARSE) == level

    hit = ont.surface_map.get(surface)
    if hit is not None and allowed(surface):
        return hit
    if fuzzy:
        best: tuple[float, str] | None = None
        limit = math.floor(max_ratio * max(len(surface), 1)) + 1
        for candidate in ont.surface_map:
            if not allowed(candidate):
                continue
            if abs(len(candidate) - len(surface)) > limit:
                continue
            ratio = edit_ratio(surface, candidate)
            if ratio <= max_ratio and (best is None or (ratio, candidate) < best):
                best = (ratio, candidate)
        if best is not None:
            return ont.surface_map[best[1]]
    return UNKNOWN


@dataclass
class CategoryCount:
    section_count: int
    frequency: int
    frequency_pct: float


@dataclass
class CategoryStats:
    rows: dict[str, CategoryCount]
    total_sections: int

    def sorted_rows(self) -> list[tuple[str, CategoryCount]]:
        return sorted(self.rows.items(), key=lambda kv: (-kv[1].frequency, kv[0]))


def category_stats(docs: list[AnnotatedDocument], ont: Ontology) -> CategoryStats:
    """Per-category distinct surface forms, occurrences, and percentage share."""
    if not docs:
        raise EmptyCorpus("category_stats needs at least one document")
    frequency: dict[str, int] = {}
    surfaces: dict[str, set[str]] = {}
    total = 0
    for doc in docs:
        for sec in doc.sections:
            category = categorize(sec.label, ont)
            frequency[category] = frequency.get(category, 0) + 1
            surfaces.setdefault(category, set()).add(normalize_surface(sec.label))
            total += 1
    if total == 0:
        raise EmptyCorpus("category_stats needs at least one section")
    rows = {
        cat: CategoryCount(
            section_count=len(surfaces[cat]),
            frequency=freq,
            frequency_pct=freq / total * 100.0,
        )
        for cat, freq in frequency.items()
    }
    return CategoryStats(rows=rows, total_sections=total)


def load_reference_counts(path: str | Path | object | None = None) -> CategoryStats:
    """Load the shipped per-category reference distribution.

    File format: ``category,section_count,frequency`` CSV with a header row;
    percentages are recomputed from the frequencies.
    """
    src = data_path("category_counts.csv") if path is None else path
    raw: dict[str, tuple[int, int]] = {}
    with _open_text(src) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != [
            "category", "section_count", "frequency",
        ]:
            raise FormatError("reference counts need a category,section_count,frequency header")
        for row_no, row in enumerate(reader, 2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                raw[row[0].strip()] = (int(row[1]), int(row[2]))
            except (IndexError, ValueError) as exc:
                raise FormatError(f"reference counts row {row_no}: {exc}") from exc
    total = sum(freq for _, freq in raw.values())
    if total == 0:
        raise FormatError("reference counts sum to zero")
    rows = {
        cat: CategoryCount(section_count=sc, frequency=freq, frequency_pct=freq / total * 100.0)
        for cat, (sc, freq) in raw.items()
    }
    return CategoryStats(rows=rows, total_sections=total)


def top_section_names() -> list[str]:
    """The bundled most-frequent section names, in file order."""
    names: list[str] = []
    with _open_text(data_path("top50_sections.txt")) as fh:
        for line in fh:
            form = line.split("#", 1)[0].strip()
            if form:
                names.append(form)
    return names


def default_lexicon_entries() -> set[str]:
    """Top section names plus every surface form in the bundled taxonomy."""
    entries = set(top_section_names())
    entries.update(load_ontology().surface_map.keys())
    return entries


def categorize_all(names: Iterable[str], ont: Ontology, **kwargs) -> list[tuple[str, str]]:
    return [(name, categorize(name, ont, **kwargs)) for name in names]
