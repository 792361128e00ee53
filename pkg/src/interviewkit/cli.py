"""Operator command line: run interviews, serve, run the pipeline, inspect runs.

Exit codes: 0 success, 1 usage error, 2 runtime error, 3 data error.
"""

from __future__ import annotations

import json
import sys
import time
import uuid
from pathlib import Path

import click

from .dialogue import AsrStatus, load_script
from .errors import (
    IntegrityError,
    InterviewKitError,
    NotFoundError,
    OrderingError,
    ScriptError,
)
from .pipeline import (
    AnalysisReport,
    ClientConfig,
    HttpLanguageModel,
    MockLanguageModel,
    PipelineConfig,
    SlideDeckSpec,
    render_slides,
    run_pipeline,
)
from .session import InterviewSession, TraceTurn, run_trace
from .transcript import TranscriptStore

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2
EXIT_DATA = 3


def _render_event(event) -> str | None:
    """One printable line per server event, backchannels as bracketed cues."""
    payload = event.payload
    if event.type == "system_utterance":
        return f"ROBOT: {payload['text']}"
    if event.type == "backchannel":
        cue = f"[{payload['token']}]"
        nod = payload.get("nod")
        if nod:
            freq = nod["frequency"]
            freq_txt = str(int(freq)) if float(freq).is_integer() else f"{freq:g}"
            cue += f" [nod x{freq_txt} {nod['speed']}]"
        return cue
    if event.type == "gesture":
        return f"({payload['tag']})"
    if event.type == "interview_complete":
        return "-- interview complete --"
    return None


def _print_events(events) -> None:
    for event in events:
        line = _render_event(event)
        if line:
            click.echo(line)


@click.group()
def cli() -> None:
    """Human-like interview system and post-interview analysis pipeline."""


@cli.command()
@click.option("--script", "script_path", required=True, help="Path to a script JSON file.")
@click.option("--simulate", "trace_path", default=None,
              help="Replay a trace file instead of reading answers interactively.")
@click.option("--data-dir", default="data", show_default=True)
def interview(script_path: str, trace_path: str | None, data_dir: str) -> None:
    """Run one interview session in the terminal."""
    if not script_path.strip():
        raise click.UsageError("--script must not be empty")
    script = load_script(script_path)
    store = TranscriptStore(Path(data_dir) / "sessions")

    if trace_path:
        doc = json.loads(Path(trace_path).read_text(encoding="utf-8"))
        turns = []
        for raw in doc.get("turns", []):
            duration = float(raw.get("duration_s", 0.0))
            if duration <= 0 and raw.get("text"):
                raise ValueError(f"trace turn {raw.get('text')!r} needs duration_s > 0")
            turns.append(TraceTurn(
                text=str(raw.get("text", "")),
                duration_s=duration,
                asr_status=AsrStatus(raw.get("asr_status", "ok" if raw.get("text") else "silence")),
                processing_delay_ms=float(raw.get("processing_delay_ms", 0.0)),
            ))
        session_id = str(doc.get("session_id") or uuid.uuid4().hex[:12])
        started_at = str(doc.get("started_at", "1970-01-01T00:00:00Z"))
        transcript, events = run_trace(
            script, turns, session_id, started_at=started_at, store=store,
            start_topic=doc.get("start_topic"))
        _print_events(events)
        click.echo(f"transcript: {store.json_path(transcript.session_id)}")
        return

    session_id = uuid.uuid4().hex[:12]
    session = InterviewSession(script, session_id, store=store)
    _print_events(session.start())
    from .dialogue import UserUtterance

    while not session.done:
        asked = time.monotonic()
        try:
            text = click.prompt("YOU", default="", show_default=False)
        except (EOFError, click.Abort):
            click.echo("(session abandoned)")
            break
        duration = max(time.monotonic() - asked, 0.001)
        status = AsrStatus.OK if text.strip() else AsrStatus.SILENCE
        utterance = UserUtterance(text, duration_s=duration if text.strip() else 0.0,
                                  asr_status=status)
        _print_events(session.on_user_turn(utterance))
    session.finalize()
    click.echo(f"transcript: {store.json_path(session_id)}")


@cli.command()
@click.option("--config", "config_path", required=True, help="Service config JSON.")
def serve(config_path: str) -> None:
    """Start the session service."""
    from .service import ServiceConfig, serve as run_service

    config = ServiceConfig.from_file(config_path)
    run_service(config)


@cli.group()
def pipeline() -> None:
    """Post-interview processing over recorded sessions."""


def _make_client(mock: bool):
    if mock:
        return MockLanguageModel()
    return HttpLanguageModel(ClientConfig.from_env())


@pipeline.command("run")
@click.option("--sessions", "sessions_arg", required=True,
              help="Comma-separated session ids, or 'all'.")
@click.option("--mock/--live", "use_mock", default=True, show_default=True)
@click.option("--data-dir", default="data", show_default=True)
@click.option("--run-id", default=None, help="Resume or name a run directory.")
@click.option("--query", "queries", multiple=True, help="Extra analysis query (repeatable).")
def pipeline_run(sessions_arg: str, use_mock: bool, data_dir: str,
                 run_id: str | None, queries: tuple[str, ...]) -> None:
    """Execute the five-stage analysis pipeline."""
    store = TranscriptStore(Path(data_dir) / "sessions")
    if sessions_arg == "all":
        session_ids = [sid for sid in store.list_sessions() if store.is_finalized(sid)]
    else:
        session_ids = [s.strip() for s in sessions_arg.split(",") if s.strip()]
    if not session_ids:
        raise NotFoundError("no finalized sessions to process")
    run_id = run_id or uuid.uuid4().hex[:12]
    run_dir = Path(data_dir) / "runs" / run_id
    result = run_pipeline(store, session_ids,
                          PipelineConfig(run_dir=run_dir, extra_queries=tuple(queries)),
                          _make_client(use_mock))
    click.echo(f"run: {run_id}")
    click.echo(f"report: {result.report_path}")
    click.echo(f"deck: {result.deck_path}")
    click.echo(f"narration: {result.narration_path}")


@cli.group()
def report() -> None:
    """Inspect analysis reports."""


def _run_dir(data_dir: str, run_id: str) -> Path:
    run_dir = Path(data_dir) / "runs" / run_id
    if not run_dir.is_dir():
        raise NotFoundError(f"unknown run id {run_id!r}")
    return run_dir


@report.command("show")
@click.argument("run_id")
@click.option("--data-dir", default="data", show_default=True)
def report_show(run_id: str, data_dir: str) -> None:
    """Print the opinion distribution and top reasons for a run."""
    run_dir = _run_dir(data_dir, run_id)
    doc = json.loads((run_dir / "report.json").read_text(encoding="utf-8"))
    report_obj = AnalysisReport.from_dict(doc)
    click.echo(f"sessions: {report_obj.n_sessions}")
    click.echo("overall experience:")
    for label in ("positive", "neutral", "negative"):
        click.echo(f"  {label.capitalize():<9} {report_obj.distribution.get(label, 0.0):.2f}")
        for i, reason in enumerate(report_obj.top_reasons.get(label, ()), start=1):
            click.echo(f"    {i}. {reason}")
    for theme, analysis in sorted(report_obj.per_theme.items()):
        click.echo(f"theme {theme}:")
        for stance in ("agree", "disagree", "unclear"):
            click.echo(f"  {stance:<9} {analysis.stances.get(stance, 0.0):.2f}")
    for entry in report_obj.additional_queries:
        click.echo(f"query: {entry['query']}")
        click.echo(f"  {entry['finding']}")


@cli.group()
def slides() -> None:
    """Slide deck artifacts."""


@slides.command("render")
@click.argument("run_id")
@click.option("--data-dir", default="data", show_default=True)
def slides_render(run_id: str, data_dir: str) -> None:
    """Re-render deck.md from a run's slide checkpoint."""
    run_dir = _run_dir(data_dir, run_id)
    spec_path = run_dir / "stages" / "04_slides" / "deck.json"
    if not spec_path.is_file():
        raise NotFoundError(f"run {run_id!r} has no slide checkpoint yet")
    spec = SlideDeckSpec.from_dict(json.loads(spec_path.read_text(encoding="utf-8")))
    out = run_dir / "deck.md"
    out.write_text(render_slides(spec), encoding="utf-8")
    click.echo(f"deck: {out}")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return EXIT_OK
    except (click.UsageError, click.BadParameter) as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return EXIT_USAGE
    except (NotFoundError, ScriptError, IntegrityError, OrderingError,
            FileNotFoundError, json.JSONDecodeError, ValueError) as exc:
        click.echo(f"data error: {exc}", err=True)
        return EXIT_DATA
    except click.Abort:
        click.echo("aborted", err=True)
        return EXIT_RUNTIME
    except (InterviewKitError, OSError, RuntimeError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
