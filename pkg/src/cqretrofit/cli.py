"""Command-line pipeline: extract, generate, filter, evaluate, report.

One CSV per (template, model) cell, named ``questions_<template>_<model>.csv``
with the single header ``Questions``, plus a JSON sidecar carrying full
provenance (statement ordinals, removal reasons, cache hits, counts).
All file writes are atomic (temp file + rename). With the mock provider,
a fixed seed, and the lexical matcher backend, repeated runs are
byte-identical.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

from . import filtration, gateway, matcher, metrics, ontology, prompts

logger = logging.getLogger(__name__)

QUESTIONS_CSV_HEADER = "Questions"


@dataclass
class RunConfig:
    """Full pipeline configuration; JSON file fields map 1:1, CLI flags
    override."""

    ontology_paths: list[str] = field(default_factory=list)
    templates: list[str] = field(default_factory=lambda: ["P1", "P2", "P3"])
    providers: list[gateway.ProviderConfig] = field(
        default_factory=lambda: [gateway.mock_provider()]
    )
    filtration: filtration.FiltrationConfig = field(
        default_factory=filtration.FiltrationConfig
    )
    matcher: matcher.MatcherConfig = field(default_factory=matcher.MatcherConfig)
    design_cq_path: Optional[str] = None
    output_dir: str = "out"
    cache_dir: Optional[str] = None
    parallelism: int = 4
    seed: int = 0
    template_file: Optional[str] = None

    def resolved_templates(self) -> list[prompts.PromptTemplate]:
        resolved = [prompts.get_template(t) for t in self.templates]
        if self.template_file:
            resolved.append(prompts.load_template_file(self.template_file))
        return resolved


def _provider_from_dict(raw: dict) -> gateway.ProviderConfig:
    model_name = raw["model_name"]
    return gateway.ProviderConfig(
        provider_id=raw["provider_id"],
        model_name=model_name,
        endpoint_url=raw.get("endpoint_url"),
        max_tokens=raw.get("max_tokens", gateway.preset_max_tokens(model_name)),
        temperature=raw.get("temperature"),
        request_timeout_s=raw.get("request_timeout_s", 60.0),
        max_retries=raw.get("max_retries", 3),
        retry_backoff_s=raw.get("retry_backoff_s", 0.5),
    )


def load_run_config(path: Union[str, Path]) -> RunConfig:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    cfg = RunConfig()
    cfg.ontology_paths = list(raw.get("ontology_paths", []))
    cfg.templates = list(raw.get("templates", cfg.templates))
    if "providers" in raw:
        cfg.providers = [_provider_from_dict(p) for p in raw["providers"]]
    if "filtration" in raw:
        cfg.filtration = filtration.FiltrationConfig(**raw["filtration"])
    if "matcher" in raw:
        cfg.matcher = matcher.MatcherConfig(**raw["matcher"])
    cfg.design_cq_path = raw.get("design_cq_path")
    cfg.output_dir = raw.get("output_dir", cfg.output_dir)
    cfg.cache_dir = raw.get("cache_dir")
    cfg.parallelism = int(raw.get("parallelism", cfg.parallelism))
    cfg.seed = int(raw.get("seed", cfg.seed))
    return cfg


def _safe_name(name: str) -> str:
    """Replace filesystem-unsafe characters in a filename component."""
    return re.sub(r"[^A-Za-z0-9._\-]", "_", name)


def _atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _dump_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _questions_csv(texts: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([QUESTIONS_CSV_HEADER])
    for text in texts:
        writer.writerow([text])
    return buf.getvalue()


def _load_statement_set(path: str, format_override: Optional[str]) -> ontology.StatementSet:
    fmt = format_override or ontology.format_for_path(path)
    text = Path(path).read_text(encoding="utf-8")
    raw = ontology.parse_ontology(text, fmt)
    return ontology.filter_statements(raw, source_id=Path(path).stem)


def _ontology_out_dir(cfg: RunConfig, source_id: str, multi: bool) -> Path:
    base = Path(cfg.output_dir)
    return base / _safe_name(source_id) if multi else base


def run_extract(cfg: RunConfig, format_override: Optional[str] = None) -> list[Path]:
    """Write one ``statements.tsv`` per ontology; ingestion counts go to
    stderr."""
    written = []
    multi = len(cfg.ontology_paths) > 1
    for path in cfg.ontology_paths:
        sset = _load_statement_set(path, format_override)
        rows = []
        for st in sset.statements:
            rows.append(
                "\t".join(
                    [
                        str(st.ordinal),
                        st.subject.label or "",
                        st.predicate.label or "",
                        st.object.readable() or "",
                        st.subject.lexical,
                        st.predicate.lexical,
                        st.object.lexical,
                    ]
                )
            )
        out_path = _ontology_out_dir(cfg, sset.source_id, multi) / "statements.tsv"
        _atomic_write_text(out_path, "\n".join(rows) + ("\n" if rows else ""))
        c = sset.counts
        print(
            f"{path}: parsed={c.parsed} excluded_blank={c.excluded_blank} "
            f"excluded_opaque={c.excluded_opaque} kept={c.kept}",
            file=sys.stderr,
        )
        written.append(out_path)
    return written


def _complete_cell(
    sset: ontology.StatementSet,
    template: prompts.PromptTemplate,
    provider: gateway.ProviderConfig,
    cache: Optional[gateway.ResponseCache],
    seed: int,
    parallelism: int,
) -> tuple[list[gateway.GenerationRecord], int]:
    """All statements of one (template, provider) cell; returns records
    in statement order and the number of cache hits."""
    rendered = [prompts.render_prompt(template, st) for st in sset.statements]

    def resolve(p: prompts.PromptInstance) -> gateway.RawResponse:
        return gateway.complete(p, provider, cache, mock_seed=seed)

    if parallelism > 1 and not provider.is_mock:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            responses = list(pool.map(resolve, rendered))
    else:
        responses = [resolve(p) for p in rendered]
    records = [
        gateway.GenerationRecord(
            statement_ordinal=p.statement_ordinal,
            template_id=p.template_id,
            provider_id=provider.provider_id,
            questions=tuple(gateway.extract_questions(r)),
        )
        for p, r in zip(rendered, responses)
    ]
    cache_hits = sum(1 for r in responses if r.from_cache)
    return records, cache_hits


def run_generate(cfg: RunConfig, format_override: Optional[str] = None) -> list[Path]:
    """Per (ontology, template, provider): generate, filter, and write
    the questions CSV plus its provenance sidecar."""
    cache = gateway.ResponseCache(cfg.cache_dir) if cfg.cache_dir else None
    templates = cfg.resolved_templates()
    written = []
    multi = len(cfg.ontology_paths) > 1
    for path in cfg.ontology_paths:
        sset = _load_statement_set(path, format_override)
        out_dir = _ontology_out_dir(cfg, sset.source_id, multi)
        for template in templates:
            for provider in cfg.providers:
                try:
                    records, cache_hits = _complete_cell(
                        sset, template, provider, cache, cfg.seed, cfg.parallelism
                    )
                except gateway.GatewayError as exc:
                    raise gateway.GatewayError(
                        f"[ontology={sset.source_id} template={template.id} "
                        f"provider={provider.provider_id}] {exc}"
                    ) from exc
                candidates = filtration.filter_questions(records, cfg.filtration)
                kept = filtration.kept_questions(candidates)
                stem = f"questions_{_safe_name(template.id)}_{_safe_name(provider.model_name)}"
                csv_path = out_dir / f"{stem}.csv"
                _atomic_write_text(csv_path, _questions_csv([c.text for c in kept]))
                n_questions = sum(len(r.questions) for r in records)
                sidecar = {
                    "ontology": sset.source_id,
                    "template": template.id,
                    "provider": provider.provider_id,
                    "model": provider.model_name,
                    "seed": cfg.seed,
                    "n_triples": sset.counts.kept,
                    "ingest_counts": {
                        "parsed": sset.counts.parsed,
                        "excluded_blank": sset.counts.excluded_blank,
                        "excluded_opaque": sset.counts.excluded_opaque,
                        "kept": sset.counts.kept,
                    },
                    "n_questions": n_questions,
                    "n_candidates": len(kept),
                    "cache_hits": cache_hits,
                    "questions": [
                        {
                            "text": c.text,
                            "statement_ordinal": c.statement_ordinal,
                            "status": c.status,
                            "removal_reason": c.removal_reason.value
                            if c.removal_reason
                            else None,
                        }
                        for c in candidates
                    ],
                }
                _atomic_write_text(out_dir / f"{stem}.json", _dump_json(sidecar))
                written.append(csv_path)
                logger.info(
                    "wrote %s (%d kept of %d questions)",
                    csv_path,
                    len(kept),
                    n_questions,
                )
    return written


def run_filter(
    cfg: RunConfig, input_csv: Union[str, Path], output_csv: Optional[Path] = None
) -> Path:
    """Standalone filtration of an existing questions CSV."""
    in_path = Path(input_csv)
    with open(in_path, newline="", encoding="utf-8") as fh:
        rows = [row[0] for row in csv.reader(fh) if row and row[0].strip()]
    if rows and rows[0].strip() == QUESTIONS_CSV_HEADER:
        rows = rows[1:]
    records = [
        gateway.GenerationRecord(i, "-", "-", (q,)) for i, q in enumerate(rows)
    ]
    candidates = filtration.filter_questions(records, cfg.filtration)
    kept = filtration.kept_questions(candidates)
    out_path = output_csv or in_path.with_name(in_path.stem + "_filtered.csv")
    _atomic_write_text(out_path, _questions_csv([c.text for c in kept]))
    sidecar = {
        "input": str(in_path),
        "n_questions": len(rows),
        "n_candidates": len(kept),
        "questions": [
            {
                "text": c.text,
                "status": c.status,
                "removal_reason": c.removal_reason.value if c.removal_reason else None,
            }
            for c in candidates
        ],
    }
    _atomic_write_text(out_path.with_suffix(".json"), _dump_json(sidecar))
    return out_path


def _read_cell(csv_path: Path) -> dict:
    sidecar_path = csv_path.with_suffix(".json")
    if not sidecar_path.exists():
        raise FileNotFoundError(
            f"missing sidecar {sidecar_path} for {csv_path}; re-run generate"
        )
    meta = json.loads(sidecar_path.read_text(encoding="utf-8"))
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = [row[0] for row in reader if row]
    if not rows or rows[0] != QUESTIONS_CSV_HEADER:
        raise ValueError(f"{csv_path}: expected header {QUESTIONS_CSV_HEADER!r}")
    meta["kept_questions"] = rows[1:]
    meta["csv_path"] = str(csv_path)
    return meta


def _discover_cells(candidates_dir: Path) -> list[dict]:
    csv_paths = sorted(candidates_dir.rglob("questions_*.csv"))
    if not csv_paths:
        raise FileNotFoundError(f"no questions_*.csv under {candidates_dir}")
    return [_read_cell(p) for p in csv_paths]


def _stats_dict(row: metrics.StatsRow) -> dict:
    return row.rounded()


def _cell_report(
    cell: dict,
    design: Optional[matcher.DesignCQSet],
    cfg: RunConfig,
    labels: Optional[metrics.ValidationLabels],
) -> dict:
    entry = {
        "ontology": cell.get("ontology", ""),
        "template": cell["template"],
        "provider": cell.get("provider", ""),
        "model": cell.get("model", ""),
        "n_questions": cell["n_questions"],
        "n_triples": cell["n_triples"],
        "n_candidates": len(cell["kept_questions"]),
    }
    if design is not None:
        report = matcher.match_candidates(cell["kept_questions"], design, cfg.matcher)
        m = metrics.compute_metrics(report, cell["n_questions"], cell["n_triples"])
        unmatched = report.unmatched_design_questions()
        stats = metrics.unmatched_stats(
            [metrics.word_count(q) for q in unmatched], len(design)
        )
        entry.update(
            {
                "n_design": len(design),
                "n_validated": m.tp,
                "n_unmatched_design": m.fn,
                "precision": m.precision,
                "recall": m.recall,
                "f1": m.f1,
                "mean_q_per_triple": m.mean_q_per_triple,
                "rounded": m.rounded(),
                "unmatched_stats": _stats_dict(stats),
                "unmatched_design_cqs": unmatched,
            }
        )
    else:
        entry["mean_q_per_triple"] = metrics.mean_questions_per_triple(
            cell["n_questions"], cell["n_triples"]
        )
        entry["rounded"] = {
            "mean_q_per_triple": metrics.round_half_up(entry["mean_q_per_triple"], 2)
        }
    if labels is not None:
        human = metrics.precision_from_labels(cell["kept_questions"], labels)
        entry["human_precision"] = human
        entry["rounded"]["human_precision"] = metrics.round_half_up(human, 4)
    return entry


def _fixture_report(fixture: dict) -> dict:
    n_design = fixture.get("n_design")
    tp = fixture["n_validated"]
    fp = fixture["n_candidates"] - tp
    fn = fixture["n_unmatched"]
    m = metrics.metrics_from_counts(
        tp, fp, fn, fixture["n_questions"], fixture["n_triples"], n_design=n_design
    )
    entry = {
        "ontology": fixture.get("ontology", ""),
        "template": fixture.get("template", ""),
        "provider": fixture.get("provider", ""),
        "model": fixture.get("model", ""),
        "n_questions": m.n_questions,
        "n_triples": m.n_triples,
        "n_candidates": m.n_candidates,
        "n_design": m.n_design,
        "n_validated": m.tp,
        "n_unmatched_design": m.fn,
        "precision": m.precision,
        "recall": m.recall,
        "f1": m.f1,
        "mean_q_per_triple": m.mean_q_per_triple,
        "rounded": m.rounded(),
    }
    word_counts = fixture.get("unmatched_word_counts")
    if word_counts is not None and n_design:
        entry["unmatched_stats"] = _stats_dict(
            metrics.unmatched_stats(word_counts, n_design)
        )
    return entry


_SUMMARY_COLUMNS = [
    "Ontology",
    "Prompt",
    "LLM",
    "No. Q.",
    "Mean Q/T",
    "No. Candidate CQs",
    "No. Validated CQs",
    "Precision",
    "Recall",
    "F1",
    "Unmatched CQs",
    "Unmatched %",
    "Mean",
    "Std",
    "Min",
    "0.25",
    "0.50",
    "Max",
]


def _summary_row(entry: dict) -> list[str]:
    rounded = entry.get("rounded", {})

    def fmt(value, pattern: str) -> str:
        return "-" if value is None else pattern.format(value)

    stats = entry.get("unmatched_stats") or {}
    return [
        entry.get("ontology", ""),
        entry.get("template", ""),
        entry.get("model", ""),
        str(entry.get("n_questions", "")),
        fmt(rounded.get("mean_q_per_triple"), "{:.2f}"),
        str(entry.get("n_candidates", "")),
        fmt(entry.get("n_validated"), "{}"),
        fmt(rounded.get("precision"), "{:.4f}"),
        fmt(rounded.get("recall"), "{:.4f}"),
        fmt(rounded.get("f1"), "{:.4f}"),
        fmt(stats.get("n_unmatched"), "{}"),
        fmt(stats.get("pct_unmatched"), "{}%"),
        fmt(stats.get("mean"), "{:.2f}"),
        fmt(stats.get("std"), "{:.2f}"),
        fmt(stats.get("min"), "{}"),
        fmt(stats.get("p25"), "{:.2f}"),
        fmt(stats.get("p50"), "{:.2f}"),
        fmt(stats.get("max"), "{}"),
    ]


def run_evaluate(
    cfg: RunConfig,
    candidates_dir: Optional[Path] = None,
    counts_fixture: Optional[Path] = None,
    validation_labels: Optional[Path] = None,
) -> tuple[Path, Path]:
    """Match candidates against design CQs and write ``report.json`` and
    ``summary.csv``. A counts fixture bypasses matching and audits the
    metric formulas over given counts; validation labels compute the
    human-validated precision instead of (or alongside) matching."""
    out_dir = Path(cfg.output_dir)
    labels = (
        metrics.load_validation_labels(validation_labels)
        if validation_labels
        else None
    )
    if counts_fixture is not None:
        fixtures = json.loads(Path(counts_fixture).read_text(encoding="utf-8"))
        entries = [_fixture_report(f) for f in fixtures]
    else:
        design = None
        if cfg.design_cq_path:
            design = matcher.load_design_cqs(cfg.design_cq_path)
            if not design.questions:
                raise ValueError(f"design CQ set {cfg.design_cq_path} is empty")
        if design is None and labels is None:
            raise ValueError(
                "evaluate needs --design, --validation-labels, or --counts-fixture"
            )
        cells = _discover_cells(candidates_dir or out_dir)
        entries = [_cell_report(cell, design, cfg, labels) for cell in cells]

    report = {
        "backend": cfg.matcher.backend.value,
        "similarity_threshold": cfg.matcher.similarity_threshold,
        "cells": entries,
    }
    report_path = out_dir / "report.json"
    _atomic_write_text(report_path, _dump_json(report))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_SUMMARY_COLUMNS)
    for entry in entries:
        writer.writerow(_summary_row(entry))
    summary_path = out_dir / "summary.csv"
    _atomic_write_text(summary_path, buf.getvalue())
    return report_path, summary_path


def run_report(report_path: Path) -> str:
    """Human-readable rendering of a report.json."""
    report = json.loads(report_path.read_text(encoding="utf-8"))
    lines = [
        f"backend={report.get('backend')} "
        f"threshold={report.get('similarity_threshold')}"
    ]
    header = _SUMMARY_COLUMNS
    rows = [_summary_row(entry) for entry in report.get("cells", [])]
    widths = [
        max(len(header[i]), *(len(r[i]) for r in rows)) if rows else len(header[i])
        for i in range(len(header))
    ]
    lines.append("  ".join(h.ljust(widths[i]) for i, h in enumerate(header)))
    for r in rows:
        lines.append("  ".join(v.ljust(widths[i]) for i, v in enumerate(r)))
    return "\n".join(lines)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cqretrofit",
        description="Retrofit candidate competency questions onto existing ontologies.",
    )
    parser.add_argument("--config", help="JSON run configuration file")
    parser.add_argument("--output-dir", help="output directory (default: out)")
    parser.add_argument("--cache-dir", help="response cache directory")
    parser.add_argument("--seed", type=int, help="mock provider seed")
    parser.add_argument("--parallelism", type=int, help="max in-flight requests")
    sub = parser.add_subparsers(dest="command", required=True)

    p_extract = sub.add_parser("extract", help="parse ontologies into statements.tsv")
    p_extract.add_argument("ontologies", nargs="+")
    p_extract.add_argument("--format", choices=["ntriples", "turtle"])

    p_generate = sub.add_parser("generate", help="generate and filter questions")
    p_generate.add_argument("ontologies", nargs="*")
    p_generate.add_argument("--format", choices=["ntriples", "turtle"])
    p_generate.add_argument(
        "--templates", nargs="+", choices=["P1", "P2", "P3"], help="default: all three"
    )
    p_generate.add_argument("--template-file", help="extra template file with a <statement> slot")
    _add_filtration_flags(p_generate)

    p_filter = sub.add_parser("filter", help="filter an existing questions CSV")
    p_filter.add_argument("input_csv")
    p_filter.add_argument("--output")
    _add_filtration_flags(p_filter)

    p_eval = sub.add_parser("evaluate", help="match candidates and compute metrics")
    p_eval.add_argument("--design", help="design CQ file (text or CSV)")
    p_eval.add_argument("--candidates-dir", help="directory with questions_*.csv")
    p_eval.add_argument("--tau", type=float, help="similarity threshold")
    p_eval.add_argument(
        "--backend", choices=["lexical_fallback", "http_embedding"]
    )
    p_eval.add_argument("--embedding-url", help="http_embedding endpoint")
    p_eval.add_argument(
        "--counts-fixture", help="JSON counts file: audit formulas, skip matching"
    )
    p_eval.add_argument("--validation-labels", help="CSV question,verdict")

    p_report = sub.add_parser("report", help="pretty-print a report.json")
    p_report.add_argument("report_json", nargs="?")

    p_templates = sub.add_parser("templates", help="prompt template operations")
    p_templates.add_argument("action", choices=["list"])
    p_templates.add_argument("--template-file")
    return parser


def _add_filtration_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--strictness", choices=["off", "lenient", "strict"])
    parser.add_argument("--dedup-threshold", type=int)
    parser.add_argument("--primitive-lexicon", help="pattern file, one regex per line")
    parser.add_argument("--narrative-patterns", help="pattern file, one regex per line")
    parser.add_argument("--global-dedup", action="store_true", default=None)


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = load_run_config(args.config) if args.config else RunConfig()
    if getattr(args, "ontologies", None):
        cfg.ontology_paths = list(args.ontologies)
    if args.output_dir:
        cfg.output_dir = args.output_dir
    if args.cache_dir:
        cfg.cache_dir = args.cache_dir
    if args.seed is not None:
        cfg.seed = args.seed
    if args.parallelism is not None:
        cfg.parallelism = args.parallelism
    if getattr(args, "templates", None):
        cfg.templates = list(args.templates)
    if getattr(args, "template_file", None):
        cfg.template_file = args.template_file

    updates: dict = {}
    if getattr(args, "strictness", None):
        updates["strictness"] = args.strictness
    if getattr(args, "dedup_threshold", None) is not None:
        updates["dedup_ratio_threshold"] = args.dedup_threshold
    if getattr(args, "primitive_lexicon", None):
        updates["primitive_patterns"] = filtration.load_pattern_file(
            args.primitive_lexicon
        )
    if getattr(args, "narrative_patterns", None):
        updates["narrative_patterns"] = filtration.load_pattern_file(
            args.narrative_patterns
        )
    if getattr(args, "global_dedup", None):
        updates["global_dedup"] = True
    if updates:
        base = cfg.filtration
        cfg.filtration = filtration.FiltrationConfig(
            dedup_ratio_threshold=updates.get(
                "dedup_ratio_threshold", base.dedup_ratio_threshold
            ),
            primitive_patterns=updates.get(
                "primitive_patterns", base.primitive_patterns
            ),
            narrative_patterns=updates.get(
                "narrative_patterns", base.narrative_patterns
            ),
            strictness=updates.get("strictness", base.strictness),
            global_dedup=updates.get("global_dedup", base.global_dedup),
        )

    if getattr(args, "design", None):
        cfg.design_cq_path = args.design
    if getattr(args, "tau", None) is not None or getattr(args, "backend", None) or getattr(
        args, "embedding_url", None
    ):
        base_m = cfg.matcher
        cfg.matcher = matcher.MatcherConfig(
            backend=getattr(args, "backend", None) or base_m.backend,
            similarity_threshold=args.tau
            if getattr(args, "tau", None) is not None
            else base_m.similarity_threshold,
            endpoint_url=getattr(args, "embedding_url", None) or base_m.endpoint_url,
            dimension=base_m.dimension,
        )
    return cfg


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=os.environ.get("CQRETROFIT_LOG", "WARNING"))
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        if args.command == "extract":
            run_extract(cfg, format_override=args.format)
        elif args.command == "generate":
            if not cfg.ontology_paths:
                parser.error("generate needs ontology paths (argument or --config)")
            run_generate(cfg, format_override=args.format)
        elif args.command == "filter":
            out = run_filter(
                cfg, args.input_csv, Path(args.output) if args.output else None
            )
            print(out)
        elif args.command == "evaluate":
            report_path, summary_path = run_evaluate(
                cfg,
                candidates_dir=Path(args.candidates_dir)
                if args.candidates_dir
                else None,
                counts_fixture=Path(args.counts_fixture)
                if args.counts_fixture
                else None,
                validation_labels=Path(args.validation_labels)
                if args.validation_labels
                else None,
            )
            print(report_path)
            print(summary_path)
        elif args.command == "report":
            path = Path(args.report_json or Path(cfg.output_dir) / "report.json")
            print(run_report(path))
        elif args.command == "templates":
            shipped = list(prompts.list_templates())
            if args.template_file:
                shipped.append(prompts.load_template_file(args.template_file))
            for t in shipped:
                print(f"{t.id}: {t.body}")
    except (
        ontology.OntologyError,
        prompts.PromptError,
        gateway.GatewayError,
        matcher.MatcherError,
        metrics.MetricsError,
        FileNotFoundError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
