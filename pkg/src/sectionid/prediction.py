"""Segmenter output: an ordered header list, optionally grounded to spans."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class Prediction:
    headers: list[str]
    spans: list[tuple[int, int]] | None = None

    def __post_init__(self) -> None:
        if self.spans is None:
            return
        if len(self.spans) != len(self.headers):
            raise ValueError(
                f"{len(self.spans)} spans for {len(self.headers)} headers"
            )
        prev_end = -1
        for start, end in self.spans:
            if start >= end or start < prev_end:
                raise ValueError("grounded spans must be sorted and non-overlapping")
            prev_end = end

    @property
    def grounded(self) -> bool:
        return self.spans is not None
