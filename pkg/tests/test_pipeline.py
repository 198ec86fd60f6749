"""End-to-end: recorded responses -> extraction -> alignment -> scores."""

from __future__ import annotations

from sectionid.llm import PromptStrategy, ReplayClient, extract_corpus
from sectionid.metrics import evaluate_run, render_report


def run_pipeline(gold_small, replay_store, replay_llm_config):
    client = ReplayClient(replay_store)
    predictions, failures = extract_corpus(
        [d.document for d in gold_small],
        PromptStrategy.zero_shot(),
        replay_llm_config,
        client,
    )
    assert failures == []
    return evaluate_run(gold_small, predictions, method="gpt-4 zero-shot (replay)")


def test_replay_extraction_headers(gold_small, replay_store, replay_llm_config):
    client = ReplayClient(replay_store)
    predictions, failures = extract_corpus(
        [d.document for d in gold_small],
        PromptStrategy.zero_shot(),
        replay_llm_config,
        client,
    )
    assert failures == []
    assert predictions["fx1"].headers == ["Allergies", "Plan"]
    assert predictions["fx2"].headers == ["HPI", "Plan"]
    assert predictions["fx3"].headers == [
        "Chief Complaint", "Patient Information and Visit Details", "Assessment",
    ]
    assert predictions["fx4"].headers == ["Vitals", "Medications", "Plan"]
    assert predictions["fx5"].headers == ["Allergies", "Famly History"]


def test_replay_pipeline_deterministic(gold_small, replay_store, replay_llm_config):
    first = run_pipeline(gold_small, replay_store, replay_llm_config)
    second = run_pipeline(gold_small, replay_store, replay_llm_config)
    assert first == second
    for fmt in ("json", "csv", "table_text"):
        assert render_report(first, fmt) == render_report(second, fmt)


def test_replay_per_doc_scores(gold_small, replay_store, replay_llm_config):
    run = run_pipeline(gold_small, replay_store, replay_llm_config)
    by_id = {d.doc_id: d for d in run.per_doc}
    assert by_id["fx1"].em == 1.0
    assert by_id["fx2"].em == 2 / 3
    assert by_id["fx3"].em == 1.0
    assert by_id["fx4"].em == 1.0
    assert by_id["fx5"].em == 0.5
    assert by_id["fx3"].unmatched_headers == ["Patient Information and Visit Details"]
