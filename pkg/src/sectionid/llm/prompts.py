"""Prompt construction for the four header-extraction strategies.

Each strategy has a fixed template; the document goes into the
``{context_text}`` slot between ``###`` markers. One-shot additionally
embeds an example note with its header list, and close-ended embeds the
allowed label set plus a 'None' escape hatch.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..corpus import Document
from ..errors import MissingField

ZERO_SHOT = "zero_shot"
ONE_SHOT = "one_shot"
CHAIN_OF_THOUGHT = "chain_of_thought"
CLOSE_ENDED = "close_ended"

STRATEGY_KINDS = (ZERO_SHOT, ONE_SHOT, CHAIN_OF_THOUGHT, CLOSE_ENDED)

_NOTE_LEAD = "Here are some clinical notes of a patient from a doctor."

_ZERO_SHOT_TEMPLATE = (
    "You are a clinician and you read the given clinical document and identify"
    " section headers from them.\n"
    "Find section headers only from the clinical text.\n"
    "For each section header, return the answer as a JSON object by filling in"
    " the following dictionary.\n"
    "{section_title: // string representing the section header}\n"
    + _NOTE_LEAD + " ### {context_text} ###\n"
)

_ONE_SHOT_TEMPLATE = (
    "You are a clinician and you read the given clinical document and identify"
    " section headers from them.\n"
    "Find section headers only from the clinical text.\n"
    "Example clinical text: {sample_text}\n"
    "Answer : {example_headers}\n"
    "For each section header return the answer as a JSON object by filling in"
    " the following dictionary.\n"
    "{section_title: // string representing the section header}\n"
    + _NOTE_LEAD + " ### {context_text} ###\n"
)

_CHAIN_OF_THOUGHT_TEMPLATE = (
    "You are a clinician and you read the given clinical document and identify"
    " section headers from them.\n"
    "Find section headers only from the clinical text.\n"
    "For each section header, return the answer as a JSON object by filling in"
    " the following dictionary.\n"
    "{section_title: // string representing the section header\n"
    "   CoT: // string describing thinking step by step }\n"
    + _NOTE_LEAD + " ### {context_text} ###\n"
)

_CLOSE_ENDED_TEMPLATE = (
    "You are a clinician and you read the given clinical document and identify"
    " section headers from them.\n"
    "Classify the section headers into one of the following section type labels.\n"
    "section types: {label_set}\n"
    "If the section headers do not belong to any of the above section type"
    " labels, classify them as 'None'.\n"
    "Only print the section types identified in a list.\n"
    + _NOTE_LEAD + " ### {context_text} ###\n"
)

_TEMPLATES = {
    ZERO_SHOT: _ZERO_SHOT_TEMPLATE,
    ONE_SHOT: _ONE_SHOT_TEMPLATE,
    CHAIN_OF_THOUGHT: _CHAIN_OF_THOUGHT_TEMPLATE,
    CLOSE_ENDED: _CLOSE_ENDED_TEMPLATE,
}


@dataclass
class PromptStrategy:
    kind: str
    example_doc: str | None = None
    example_headers: list[str] = field(default_factory=list)
    label_set: list[str] = field(default_factory=list)

    def validate(self) -> None:
        if self.kind not in STRATEGY_KINDS:
            raise MissingField(f"unknown strategy kind {self.kind!r}")
        if self.kind == ONE_SHOT and (not self.example_doc or not self.example_headers):
            raise MissingField("one_shot needs example_doc and example_headers")
        if self.kind == CLOSE_ENDED and not self.label_set:
            raise MissingField("close_ended needs a non-empty label_set")

    @classmethod
    def zero_shot(cls) -> "PromptStrategy":
        return cls(ZERO_SHOT)

    @classmethod
    def one_shot(cls, example_doc: str, example_headers: list[str]) -> "PromptStrategy":
        return cls(ONE_SHOT, example_doc=example_doc, example_headers=list(example_headers))

    @classmethod
    def chain_of_thought(cls) -> "PromptStrategy":
        return cls(CHAIN_OF_THOUGHT)

    @classmethod
    def close_ended(cls, label_set: list[str]) -> "PromptStrategy":
        return cls(CLOSE_ENDED, label_set=list(label_set))


def build_prompt(strategy: PromptStrategy, doc: Document) -> str:
    """Fill the strategy's template with the document (and strategy extras)."""
    strategy.validate()
    prompt = _TEMPLATES[strategy.kind]
    if strategy.kind == ONE_SHOT:
        prompt = prompt.replace("{sample_text}", strategy.example_doc or "")
        prompt = prompt.replace(
            "{example_headers}", json.dumps(strategy.example_headers, ensure_ascii=False)
        )
    elif strategy.kind == CLOSE_ENDED:
        prompt = prompt.replace(
            "{label_set}", json.dumps(strategy.label_set, ensure_ascii=False)
        )
    return prompt.replace("{context_text}", doc.text)


def split_prompt(prompt: str) -> tuple[str, str]:
    """Split a built prompt into (system instructions, user note block).

    The instruction block goes to the system role and the note block, from
    its lead-in sentence onward, to the user role.
    """
    idx = prompt.find(_NOTE_LEAD)
    if idx <= 0:
        return "", prompt
    return prompt[:idx].rstrip("\n"), prompt[idx:]
