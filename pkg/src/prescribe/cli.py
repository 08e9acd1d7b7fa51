"""Command-line surface: ingest, annotate, score, agree, export, serve.

Exit codes: 0 success, 1 usage error, 2 data error, 3 transport error
(including a failure ratio above the configured threshold). All results
go to stdout; diagnostics go to stderr.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from pathlib import Path

import click

from prescribe.agreement import (
    AlignmentError,
    LabelKind,
    render_report,
    report_from_labels,
    report_pair,
)
from prescribe.corpus import (
    AnnotationStore,
    CorpusError,
    DatasetManifest,
    export_analysis,
    export_training,
    ingest,
    load_corpus,
    load_label_streams,
    save_corpus,
)
from prescribe.lexicon import LexiconError, load_lexicon, load_seed_lexicon
from prescribe.llm.annotate import LlmConfig, annotate_batch
from prescribe.llm.templates import load_templates
from prescribe.llm.transport import (
    LiveTransport,
    MockTransport,
    RecordingTransport,
    ReplayTransport,
    TransportError,
)
from prescribe.pipeline import ENGINE_ANNOTATOR, annotate_with_engine
from prescribe.text import TextUnit

CORPUS_FILE = "corpus.jsonl"
STORE_FILE = "annotations.jsonl"
RUN_LOG_FILE = "runs.jsonl"
CONFIG_FILE = "prescribe.json"


@dataclass
class Workspace:
    root: Path
    settings: dict

    def path(self, name: str) -> Path:
        return self.root / name

    def setting(self, key: str, flag_value, default=None):
        """Flags override config-file values, which override defaults."""
        if flag_value is not None:
            return flag_value
        return self.settings.get(key, default)

    def lexicon(self, flag_value: str | None):
        chosen = self.setting("lexicon", flag_value)
        return load_lexicon(chosen) if chosen else load_seed_lexicon()

    def templates(self, flag_value: str | None):
        return load_templates(self.setting("templates", flag_value))

    def store(self) -> AnnotationStore:
        return AnnotationStore(self.path(STORE_FILE))

    def corpus(self):
        return load_corpus(self.path(CORPUS_FILE))


@click.group()
@click.option(
    "--workspace",
    "-w",
    type=click.Path(file_okay=False, path_type=Path),
    default=Path("."),
    help="Directory holding the corpus, store and outputs.",
)
@click.option(
    "--config",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="JSON config file (default: <workspace>/prescribe.json if present).",
)
@click.pass_context
def cli(ctx: click.Context, workspace: Path, config: Path | None) -> None:
    """Prescriptive offensive-language annotation toolkit."""
    workspace.mkdir(parents=True, exist_ok=True)
    config_path = config or workspace / CONFIG_FILE
    settings = {}
    if config_path.exists():
        settings = json.loads(config_path.read_text(encoding="utf-8"))
    ctx.obj = Workspace(root=workspace, settings=settings)


@cli.command("ingest")
@click.option("--manifest", required=True, type=click.Path(dir_okay=False, path_type=Path))
@click.pass_obj
def cmd_ingest(ws: Workspace, manifest: Path) -> None:
    """Load the manifest's sources, dedup, and persist the merged corpus."""
    units, report = ingest(DatasetManifest.load(manifest), manifest.parent)
    save_corpus(units, ws.path(CORPUS_FILE))
    click.echo(report.summary())
    if report.dropped_duplicates:
        click.echo("dropped duplicate ids:", err=True)
        for dropped, kept in report.dropped_duplicates:
            click.echo(f"  {dropped} (same text as {kept})", err=True)


def _build_transport(ws: Workspace, mode: str, recording: Path | None, base_url: str | None, lexicon):
    if mode in ("replay", "record") and recording is None:
        raise click.UsageError(f"--transport {mode} requires --recording PATH")
    if mode == "replay":
        return ReplayTransport(recording)
    if mode == "mock":
        transport = MockTransport(lexicon)
        return RecordingTransport(transport, recording) if recording else transport
    if not base_url:
        raise click.UsageError("--transport live/record requires --base-url")
    live = LiveTransport(base_url)
    return RecordingTransport(live, recording) if mode == "record" else live


def _summarize(records) -> dict:
    summary = {"total": len(records), "di": {}, "ag": {}, "toxic": {"true": 0, "false": 0}}
    for record in records:
        if record.di is not None:
            summary["di"][str(int(record.di))] = summary["di"].get(str(int(record.di)), 0) + 1
        if record.ag is not None:
            summary["ag"][str(int(record.ag))] = summary["ag"].get(str(int(record.ag)), 0) + 1
        summary["toxic"]["true" if record.toxic else "false"] += 1
    return summary


@cli.command("annotate")
@click.option("--engine", "use_engine", is_flag=True, help="Annotate with the rule engine.")
@click.option("--llm", "use_llm", is_flag=True, help="Annotate through an LLM transport.")
@click.option("--mode", type=click.Choice(["descriptive", "prescriptive"]), default="prescriptive")
@click.option("--transport", "transport_mode", type=click.Choice(["live", "record", "replay", "mock"]), default=None)
@click.option("--recording", type=click.Path(path_type=Path), default=None)
@click.option("--base-url", default=None, help="Chat-completion endpoint base URL.")
@click.option("--model", default=None, help="Model name for LLM annotation.")
@click.option("--lexicon", "lexicon_path", default=None, type=click.Path(dir_okay=False))
@click.option("--templates", "templates_path", default=None, type=click.Path(file_okay=False))
@click.option("--concurrency", type=int, default=None)
@click.option("--rate-limit", type=int, default=None, help="Max requests per minute.")
@click.option("--fail-threshold", type=float, default=0.05, show_default=True)
@click.option("--output", type=click.Choice(["table", "jsonl"]), default="table")
@click.pass_obj
def cmd_annotate(
    ws: Workspace,
    use_engine: bool,
    use_llm: bool,
    mode: str,
    transport_mode: str | None,
    recording: Path | None,
    base_url: str | None,
    model: str | None,
    lexicon_path: str | None,
    templates_path: str | None,
    concurrency: int | None,
    rate_limit: int | None,
    fail_threshold: float,
    output: str,
) -> None:
    """Annotate the ingested corpus and persist one record per unit."""
    if use_engine == use_llm:
        raise click.UsageError("choose exactly one of --engine or --llm")
    lexicon = ws.lexicon(lexicon_path)
    units = ws.corpus()
    store = ws.store()

    if use_engine:
        produced = []
        for i, unit in enumerate(units):
            if store.has(unit.id, ENGINE_ANNOTATOR):
                produced.append(store.latest(unit.id, ENGINE_ANNOTATOR))
                continue
            produced.append(
                store.append(annotate_with_engine(unit, lexicon, created_at=float(i)))
            )
        summary = _summarize(produced)
        _emit_summary(summary, output)
        return

    transport_mode = ws.setting("transport", transport_mode, "mock")
    config = LlmConfig(model=ws.setting("model", model, "mock-model"))
    transport = _build_transport(ws, transport_mode, recording, ws.setting("base_url", base_url), lexicon)
    deterministic = transport_mode in ("mock", "replay")
    counter = iter(range(10**9))
    clock = (lambda: float(next(counter))) if deterministic else None
    kwargs = {"clock": clock} if clock else {}
    batch = annotate_batch(
        units,
        mode,
        transport,
        ws.templates(templates_path),
        config,
        store,
        run_log_path=ws.path(RUN_LOG_FILE),
        concurrency=ws.setting("concurrency", concurrency, 4),
        rate_limit_per_minute=ws.setting("rate_limit", rate_limit),
        **kwargs,
    )
    annotator = config.annotator_id(mode)
    produced = list(store.latest_for_annotator(annotator).values())
    summary = _summarize(produced)
    summary["batch"] = batch.to_dict()
    _emit_summary(summary, output)
    if batch.failure_ratio > fail_threshold:
        raise TransportError(
            f"failure ratio {batch.failure_ratio:.2%} exceeds threshold {fail_threshold:.2%}"
        )


def _emit_summary(summary: dict, output: str) -> None:
    if output == "jsonl":
        click.echo(json.dumps(summary, sort_keys=True))
        return
    click.echo(f"total: {summary['total']}")
    for key in ("di", "ag"):
        if summary[key]:
            counts = ", ".join(f"{k}: {v}" for k, v in sorted(summary[key].items()))
            click.echo(f"{key.upper()} counts: {counts}")
    click.echo(f"toxic: {summary['toxic']['true']}  non-toxic: {summary['toxic']['false']}")
    if "batch" in summary:
        click.echo(f"batch: {json.dumps(summary['batch'], sort_keys=True)}")


@cli.command("score")
@click.argument("text")
@click.option("--lexicon", "lexicon_path", default=None, type=click.Path(dir_okay=False))
@click.option("--output", type=click.Choice(["table", "jsonl"]), default="table")
@click.pass_obj
def cmd_score(ws: Workspace, text: str, lexicon_path: str | None, output: str) -> None:
    """One-shot analysis of a single text."""
    lexicon = ws.lexicon(lexicon_path)
    unit = TextUnit.from_raw("adhoc", text)
    record = annotate_with_engine(unit, lexicon)
    from prescribe.pipeline import di_evidence

    result, di = di_evidence(unit, lexicon)
    payload = {
        "text": text,
        "findings": [
            {
                "category": f.category.value,
                "span": list(f.span) if f.span else None,
                "role": f.role.value,
                "weight": f.weight,
                "surface": unit.span_text(f.span) if f.span else None,
            }
            for f in result.findings
        ],
        "score": result.score,
        "level": int(result.level),
        "di": int(di.primary),
        "di_alternates": sorted(int(a) for a in di.alternates),
        "di_evidence": [{"rule": r, "span": list(s)} for r, s in di.evidence],
        "toxic": record.toxic,
    }
    if output == "jsonl":
        click.echo(json.dumps(payload, sort_keys=True, ensure_ascii=False))
        return
    click.echo(f"text: {text}")
    if payload["findings"]:
        click.echo("findings:")
        for f in payload["findings"]:
            where = f["span"] if f["span"] else "whole unit"
            surface = f" ({f['surface']!r})" if f["surface"] else ""
            click.echo(f"  {f['category']} [{f['role']}] weight {f['weight']} at {where}{surface}")
    else:
        click.echo("findings: none")
    click.echo(f"score: {payload['score']}  level: {payload['level']}")
    evidence = ", ".join(e["rule"] for e in payload["di_evidence"]) or "none"
    click.echo(f"DI: {payload['di']} (evidence: {evidence}; alternates: {payload['di_alternates']})")
    click.echo(f"toxic: {payload['toxic']}")


@cli.command("agree")
@click.option("--pair", required=True, help="Two annotator ids, comma separated.")
@click.option("--kind", type=click.Choice([k.value for k in LabelKind]), default="Toxicity")
@click.option("--from-csv", "csv_path", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Compute from label columns in a CSV instead of the store.")
@click.option("--output", type=click.Choice(["table", "csv", "jsonl"]), default="table")
@click.option("--out", "report_out", type=click.Path(path_type=Path), default=None,
              help="Also write the report as a machine-readable JSON line.")
@click.option("--matrix-out", type=click.Path(path_type=Path), default=None,
              help="Also write the confusion matrix as CSV.")
@click.pass_obj
def cmd_agree(
    ws: Workspace,
    pair: str,
    kind: str,
    csv_path: Path | None,
    output: str,
    report_out: Path | None,
    matrix_out: Path | None,
) -> None:
    """Pairwise reliability: percent agreement, Cohen's Kappa, Gwet's AC1."""
    names = [p.strip() for p in pair.split(",")]
    if len(names) != 2 or not all(names):
        raise click.UsageError("--pair must name two annotators, e.g. --pair a,b")
    label_kind = LabelKind(kind)
    if csv_path is not None:
        streams = load_label_streams(csv_path)
        missing = [n for n in names if n not in streams]
        if missing:
            raise CorpusError(
                f"column(s) {missing} not in {csv_path}; available: {sorted(streams)}"
            )
        report = report_from_labels(streams[names[0]], streams[names[1]], label_kind, (names[0], names[1]))
    else:
        store = ws.store()
        known = store.annotators()
        missing = [n for n in names if n not in known]
        if missing:
            raise CorpusError(f"annotator(s) {missing} not in store; known: {known}")
        a = list(store.latest_for_annotator(names[0]).values())
        b = list(store.latest_for_annotator(names[1]).values())
        report = report_pair(a, b, label_kind, (names[0], names[1]))
    click.echo(render_report(report, output))
    if report_out is not None:
        report_out.write_text(render_report(report, "jsonl") + "\n", encoding="utf-8")
        click.echo(f"report written to {report_out}", err=True)
    if matrix_out is not None:
        matrix_out.write_text(report.matrix.to_csv(), encoding="utf-8")
        click.echo(f"matrix written to {matrix_out}", err=True)


@cli.command("export")
@click.option("--kind", type=click.Choice(["analysis", "training"]), required=True)
@click.option("--annotator", default=None)
@click.option("--out", required=True, type=click.Path(dir_okay=False, path_type=Path))
@click.pass_obj
def cmd_export(ws: Workspace, kind: str, annotator: str | None, out: Path) -> None:
    """Write analysis (full records) or training (text, di, ag, toxic) files."""
    store = ws.store()
    if kind == "analysis":
        count = export_analysis(store, out, annotator)
    else:
        if annotator is None:
            raise click.UsageError("--kind training requires --annotator")
        count = export_training(store, ws.corpus(), out, annotator)
    click.echo(f"wrote {count} lines to {out}")


@cli.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8400, show_default=True)
@click.option("--annotators", "annotators_path", type=click.Path(dir_okay=False, path_type=Path),
              default=None, help="JSON file mapping annotator ids to bearer tokens.")
@click.option("--static-dir", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="Workbench bundle to serve at /.")
@click.option("--lexicon", "lexicon_path", default=None, type=click.Path(dir_okay=False))
@click.pass_obj
def cmd_serve(
    ws: Workspace,
    host: str,
    port: int,
    annotators_path: Path | None,
    static_dir: Path | None,
    lexicon_path: str | None,
) -> None:
    """Run the annotation workbench API (and UI when --static-dir is given)."""
    import uvicorn

    from prescribe.service import create_app

    tokens = None
    annotators_path = annotators_path or (
        ws.path("annotators.json") if ws.path("annotators.json").exists() else None
    )
    if annotators_path is not None:
        tokens = json.loads(Path(annotators_path).read_text(encoding="utf-8"))
    app = create_app(ws.corpus(), ws.lexicon(lexicon_path), ws.store(), tokens, static_dir)
    uvicorn.run(app, host=host, port=port)


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except (CorpusError, LexiconError, AlignmentError, ValueError) as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except TransportError as exc:
        click.echo(f"transport error: {exc}", err=True)
        return 3


if __name__ == "__main__":
    sys.exit(main())
