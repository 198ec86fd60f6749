"""Command-line entry point: segment, evaluate, stats, normalize, iaa.

Runs are reproducible: configuration comes from an optional JSON file with
flag overrides, a resolved snapshot is written next to the outputs, and all
output files are deterministic byte-for-byte given the same inputs. The API
bearer token is only ever read from the environment variable named in the
config, never from the config file itself.

Exit codes: 0 clean, 2 partial (some documents failed or were missing),
1 fatal.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import align, baselines, metrics, ontology
from .corpus import AnnotatedDocument, corpus_stats, load_gold_corpus
from .errors import SectionIdError
from .llm import (
    CLOSE_ENDED,
    ONE_SHOT,
    STRATEGY_KINDS,
    HTTPChatClient,
    LLMConfig,
    PromptStrategy,
    RecordingClient,
    ReplayClient,
    extract_corpus,
)
from .prediction import Prediction

log = logging.getLogger(__name__)

OK = 0
FATAL = 1
PARTIAL = 2

SEGMENTERS = ("keyword", "regex", "rules", "llm")

_CONFIG_DEFAULTS: dict[str, object] = {
    "corpus": None,
    "segmenter": "rules",
    "strategy": "zero_shot",
    "ontology": None,
    "lexicon": None,
    "ruleset": None,
    "out": "runs",
    "seed": 0,
    "replay": None,
    "record": None,
    "workers": None,
    "strict": True,
    "close_ended_eval": False,
    "alignment": {"max_edit_ratio": align.DEFAULT_MAX_EDIT_RATIO},
    "llm": {},
}


def _load_config(path: str | None) -> dict:
    resolved = json.loads(json.dumps(_CONFIG_DEFAULTS))
    if path:
        with open(path, encoding="utf-8") as fh:
            user = json.load(fh)
        for key, value in user.items():
            if isinstance(value, dict) and isinstance(resolved.get(key), dict):
                resolved[key].update(value)
            else:
                resolved[key] = value
    return resolved


def _apply_overrides(config: dict, args: argparse.Namespace) -> dict:
    direct = (
        "corpus", "segmenter", "strategy", "ontology", "lexicon",
        "ruleset", "out", "replay", "workers",
    )
    for key in direct:
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    if getattr(args, "max_edit_ratio", None) is not None:
        config["alignment"]["max_edit_ratio"] = args.max_edit_ratio
    if getattr(args, "strict", None) is not None:
        config["strict"] = args.strict
    if getattr(args, "close_ended", False):
        config["close_ended_eval"] = True
    return config


def _write_snapshot(config: dict, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "run_config.json", "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def _load_ontology(config: dict) -> ontology.Ontology:
    return ontology.load_ontology(config.get("ontology"))


def _build_strategy(config: dict) -> PromptStrategy:
    kind = config.get("strategy", "zero_shot")
    if kind not in STRATEGY_KINDS:
        raise SectionIdError(f"unknown strategy {kind!r}; expected one of {STRATEGY_KINDS}")
    llm_cfg = config.get("llm", {})
    if kind == ONE_SHOT:
        example_doc = llm_cfg.get("example_doc")
        example_headers = llm_cfg.get("example_headers")
        if not example_doc or not example_headers:
            with ontology.data_path("one_shot_example.json").open("r", encoding="utf-8") as fh:
                example = json.load(fh)
            example_doc = example["text"]
            example_headers = example["headers"]
        return PromptStrategy.one_shot(example_doc, example_headers)
    if kind == CLOSE_ENDED:
        label_set = llm_cfg.get("label_set") or ontology.top_section_names()
        return PromptStrategy.close_ended(label_set)
    return PromptStrategy(kind)


def _llm_config(config: dict, workers: int | None) -> LLMConfig:
    known = {f for f in LLMConfig.__dataclass_fields__}
    kwargs = {k: v for k, v in config.get("llm", {}).items() if k in known}
    llm = LLMConfig(**kwargs)
    if workers is not None:
        llm.max_in_flight = workers
    return llm


def _segment_docs(
    docs: list[AnnotatedDocument], config: dict
) -> tuple[dict[str, Prediction], list[str]]:
    """Run the configured segmenter; returns predictions and failed doc ids."""
    segmenter = config["segmenter"]
    if segmenter not in SEGMENTERS:
        raise SectionIdError(f"unknown segmenter {segmenter!r}; expected one of {SEGMENTERS}")
    if segmenter == "llm":
        if not config.get("replay") and not config.get("llm", {}).get("endpoint_url"):
            raise SectionIdError("llm segmenter needs llm.endpoint_url or --replay")
        strategy = _build_strategy(config)
        llm = _llm_config(config, config.get("workers"))
        if config.get("replay"):
            client = ReplayClient(config["replay"])
        else:
            client = HTTPChatClient(llm)
        if config.get("record"):
            client = RecordingClient(client, config["record"])
        predictions, failures = extract_corpus(
            [d.document for d in docs], strategy, llm, client
        )
        return predictions, [f.doc_id for f in failures]

    lexicon = (
        baselines.load_lexicon(config["lexicon"])
        if config.get("lexicon")
        else baselines.HeaderLexicon(entries=ontology.default_lexicon_entries())
    )
    rule_config = (
        baselines.load_ruleset(config["ruleset"])
        if config.get("ruleset")
        else baselines.RuleConfig()
    )
    predictions = {}
    for doc in docs:
        if segmenter == "keyword":
            predictions[doc.id] = baselines.keyword_segment(doc.document, lexicon)
        elif segmenter == "regex":
            predictions[doc.id] = baselines.regex_segment(doc.document, rule_config)
        else:
            predictions[doc.id] = baselines.rule_segment(doc.document, lexicon, rule_config)
    return predictions, []


def cmd_segment(args: argparse.Namespace) -> int:
    config = _apply_overrides(_load_config(args.config), args)
    if not config.get("corpus"):
        raise SectionIdError("segment needs --corpus")
    docs = load_gold_corpus(config["corpus"], strict=bool(config.get("strict", True)))
    ont = _load_ontology(config)
    out_dir = Path(config["out"])
    _write_snapshot(config, out_dir)
    predictions, failed = _segment_docs(docs, config)
    max_ratio = float(config["alignment"]["max_edit_ratio"])
    with open(out_dir / "predictions.jsonl", "w", encoding="utf-8") as fh:
        for doc in docs:
            pred = predictions.get(doc.id, Prediction(headers=[]))
            # headers stay in model/segmenter order; fully grounded output
            # carries a parallel span list, otherwise grounding is reported
            # per header index so nothing is dropped
            record: dict[str, object] = {
                "id": doc.id,
                "headers": pred.headers,
                "spans": [list(s) for s in pred.spans] if pred.grounded else None,
                "categories": [ontology.categorize(h, ont) for h in pred.headers],
            }
            if not pred.grounded:
                result = align.align_headers(doc.document, pred, max_edit_ratio=max_ratio)
                record["grounding"] = [
                    {"header_index": m.prediction_index, "span": list(m.span), "kind": m.match_kind}
                    for m in result.matches
                ]
                record["unmatched"] = result.unmatched_predictions
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    if failed:
        print(f"{len(failed)} document(s) failed: {', '.join(sorted(failed))}", file=sys.stderr)
        return PARTIAL
    return OK


def _load_predictions(path: str | Path) -> dict[str, Prediction]:
    predictions: dict[str, Prediction] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            obj = json.loads(line)
            spans = obj.get("spans")
            headers = list(obj.get("headers", []))
            if spans is not None:
                spans = [tuple(s) for s in spans]
            # ungrounded predictions are re-aligned inside evaluate_run
            predictions[obj["id"]] = Prediction(headers=headers, spans=spans)
    return predictions


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _apply_overrides(_load_config(args.config), args)
    if not config.get("corpus"):
        raise SectionIdError("evaluate needs --corpus")
    docs = load_gold_corpus(config["corpus"], strict=bool(config.get("strict", True)))
    predictions = _load_predictions(args.predictions)
    ont = _load_ontology(config)
    run = metrics.evaluate_run(
        docs,
        predictions,
        ont,
        method=config.get("method", config["segmenter"]),
        corpus_name=str(config["corpus"]),
        max_edit_ratio=float(config["alignment"]["max_edit_ratio"]),
        close_ended=bool(config.get("close_ended_eval", False)),
    )
    out_dir = Path(config["out"])
    _write_snapshot(config, out_dir)
    for fmt, name in (("json", "report.json"), ("csv", "report.csv"), ("table_text", "report.txt")):
        with open(out_dir / name, "w", encoding="utf-8") as fh:
            fh.write(metrics.render_report(run, fmt))
    print(metrics.render_report(run, "table_text"), end="")
    missing = [doc.id for doc in docs if doc.id not in predictions]
    if missing:
        print(
            f"{len(missing)} document(s) had no prediction and scored empty: "
            f"{', '.join(sorted(missing))}",
            file=sys.stderr,
        )
        return PARTIAL
    return OK


def cmd_stats(args: argparse.Namespace) -> int:
    docs = load_gold_corpus(args.corpus, strict=args.strict if args.strict is not None else True)
    stats = corpus_stats(docs)
    payload = {
        "document_count": stats.document_count,
        "mean_token_length": stats.mean_token_length,
        "stddev_token_length": stats.stddev_token_length,
        "mean_sections_per_doc": stats.mean_sections_per_doc,
        "stddev_sections_per_doc": stats.stddev_sections_per_doc,
    }
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "corpus_stats.json").write_text(text + "\n", encoding="utf-8")
    print(text)
    return OK


def cmd_normalize(args: argparse.Namespace) -> int:
    ont = ontology.load_ontology(args.ontology)
    lines: list[str] = []
    with open(args.names, encoding="utf-8") as fh:
        for line in fh:
            name = line.rstrip("\n")
            if not name.strip() or name.lstrip().startswith("#"):
                continue
            lines.append(f"{name}\t{ontology.categorize(name, ont)}")
    output = "\n".join(lines) + ("\n" if lines else "")
    if args.out:
        Path(args.out).write_text(output, encoding="utf-8")
    print(output, end="")
    return OK


def cmd_iaa(args: argparse.Namespace) -> int:
    pairs: list[tuple[list[str], list[str]]] = []
    ids: list[str] = []
    with open(args.pairs, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            obj = json.loads(line)
            pairs.append((list(obj["a"]), list(obj["b"])))
            ids.append(str(obj.get("id", lineno)))
    report = metrics.iaa_report(pairs, ids)
    payload = {
        "mean_jaccard": report.mean_jaccard,
        "per_pair": [{"id": pid, "jaccard": value} for pid, value in report.per_pair],
    }
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "iaa.json").write_text(text + "\n", encoding="utf-8")
    print(text)
    return OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sectionid",
        description="Identify, normalize, and score section headers in clinical notes.",
    )
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("--corpus", help="gold corpus JSONL")
        p.add_argument("--out", help="output directory")
        p.add_argument("--ontology", help="taxonomy CSV (default: bundled)")
        p.add_argument("--max-edit-ratio", type=float, dest="max_edit_ratio")
        p.add_argument(
            "--strict", action=argparse.BooleanOptionalAction, default=None,
            help="abort on corpus invariant violations (default: strict)",
        )

    p_segment = sub.add_parser("segment", help="run a segmenter over a corpus")
    common(p_segment)
    p_segment.add_argument("--segmenter", choices=SEGMENTERS)
    p_segment.add_argument("--strategy", choices=STRATEGY_KINDS)
    p_segment.add_argument("--lexicon", help="lexicon file for keyword/rules segmenters")
    p_segment.add_argument("--ruleset", help="JSON ruleset for regex/rules segmenters")
    p_segment.add_argument("--replay", help="replay store directory (offline llm runs)")
    p_segment.add_argument("--workers", type=int, help="max in-flight llm requests")
    p_segment.set_defaults(func=cmd_segment)

    p_eval = sub.add_parser("evaluate", help="score predictions against gold")
    common(p_eval)
    p_eval.add_argument("--predictions", required=True, help="predictions JSONL from segment")
    p_eval.add_argument("--segmenter", choices=SEGMENTERS, help="method name for the report")
    p_eval.add_argument(
        "--close-ended", action="store_true", dest="close_ended",
        help="compare categorized label sets instead of spans",
    )
    p_eval.set_defaults(func=cmd_evaluate)

    p_stats = sub.add_parser("stats", help="corpus summary statistics")
    p_stats.add_argument("--corpus", required=True)
    p_stats.add_argument("--out")
    p_stats.add_argument("--strict", action=argparse.BooleanOptionalAction, default=None)
    p_stats.set_defaults(func=cmd_stats)

    p_norm = sub.add_parser("normalize", help="categorize section names from a file")
    p_norm.add_argument("--names", required=True, help="one section name per line")
    p_norm.add_argument("--ontology", help="taxonomy CSV (default: bundled)")
    p_norm.add_argument("--out", help="output TSV path")
    p_norm.set_defaults(func=cmd_normalize)

    p_iaa = sub.add_parser("iaa", help="inter-annotator agreement over annotation pairs")
    p_iaa.add_argument("--pairs", required=True, help='JSONL: {"id", "a": [...], "b": [...]}')
    p_iaa.add_argument("--out")
    p_iaa.set_defaults(func=cmd_iaa)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return int(args.func(args))
    except SectionIdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FATAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FATAL


if __name__ == "__main__":
    sys.exit(main())
