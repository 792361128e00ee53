"""Pipeline orchestration: five chained stages with per-stage checkpoints.

Stage outputs live under ``<run_dir>/stages/<stage>/``; the run manifest
records which stages completed, and a resumed run skips them entirely.
Every write is atomic (tmp + rename), so a crash at any stage boundary
loses nothing that was completed. Artifacts at the run root:
``report.json``, ``deck.md``, ``narration.txt``.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from ..dialogue import InterviewScript
from ..errors import EmptyInputError, NotFoundError, StageError
from ..transcript import SessionTranscript, TranscriptStore
from .analysis import analyze
from .client import LanguageModelClient
from .narration import DEFAULT_WORD_BUDGET, generate_presentation_script, render_narration
from .prompts import STAGES
from .records import AnalysisReport, StructuredRecord, parse_record
from .slides import MAX_SLIDES, MIN_SLIDES, SlideDeckSpec, generate_slide_content, render_slides
from .stages import CorrectedSession, correct_transcript, summarize_to_records

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


class HaltRequested(Exception):
    """Raised by the debugging hook that simulates a crash between stages."""


@dataclass(frozen=True)
class PipelineConfig:
    run_dir: Path
    event_name: str = "Interview Study"
    event_date: str = ""
    word_budget: int = DEFAULT_WORD_BUDGET
    min_slides: int = MIN_SLIDES
    max_slides: int = MAX_SLIDES
    extra_queries: tuple[str, ...] = ()
    workers: int = 1
    halt_after_stage: str | None = None  # debugging aid: crash at a stage boundary


@dataclass
class PipelineResult:
    run_dir: Path
    executed_stages: list[str]
    report: AnalysisReport | None = None

    @property
    def report_path(self) -> Path:
        return self.run_dir / "report.json"

    @property
    def deck_path(self) -> Path:
        return self.run_dir / "deck.md"

    @property
    def narration_path(self) -> Path:
        return self.run_dir / "narration.txt"


def _write_atomic(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    tmp.replace(path)


def _dump(doc: object) -> bytes:
    return (json.dumps(doc, ensure_ascii=False, indent=2, sort_keys=True) + "\n").encode("utf-8")


class PipelineRunner:
    """Executes (or resumes) one pipeline run over a fixed session set."""

    def __init__(
        self,
        store: TranscriptStore,
        config: PipelineConfig,
        llm: LanguageModelClient,
        script_resolver: Callable[[str], InterviewScript],
    ):
        self.store = store
        self.config = config
        self.llm = llm
        self.resolve_script = script_resolver
        self.run_dir = Path(config.run_dir)
        self.stages_dir = self.run_dir / "stages"

    # -- manifest ------------------------------------------------------

    @property
    def manifest_path(self) -> Path:
        return self.run_dir / MANIFEST_NAME

    def _load_manifest(self, session_ids: list[str]) -> dict:
        if self.manifest_path.is_file():
            manifest = json.loads(self.manifest_path.read_text(encoding="utf-8"))
            if manifest.get("session_ids") != session_ids:
                raise StageError("manifest",
                                 "run directory belongs to a different session set",
                                 checkpoint_path=str(self.manifest_path))
            return manifest
        return {"v": 1, "session_ids": session_ids, "completed_stages": []}

    def _save_manifest(self, manifest: dict) -> None:
        _write_atomic(self.manifest_path, _dump(manifest))

    # -- stage outputs ---------------------------------------------------

    def _stage_dir(self, stage: str) -> Path:
        return self.stages_dir / stage

    def _session_checkpoint(self, stage: str, session_id: str) -> Path:
        return self._stage_dir(stage) / f"{session_id}.json"

    def _load_transcripts(self, session_ids: list[str]) -> dict[str, SessionTranscript]:
        transcripts = {}
        for session_id in session_ids:
            if not self.store.exists(session_id):
                raise NotFoundError(f"session {session_id!r} does not exist")
            if not self.store.is_finalized(session_id):
                raise NotFoundError(f"session {session_id!r} is not finalized")
            transcripts[session_id] = self.store.load(session_id)
        return transcripts

    # -- stages ----------------------------------------------------------

    def _map_sessions(self, session_ids: list[str], fn: Callable[[str], tuple[str, bytes]],
                      stage: str) -> None:
        """Run a per-session stage, optionally in parallel, writing one
        checkpoint file per session."""
        def one(session_id: str) -> None:
            name, payload = fn(session_id)
            _write_atomic(self._session_checkpoint(stage, name), payload)

        if self.config.workers > 1:
            with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
                list(pool.map(one, session_ids))
        else:
            for session_id in session_ids:
                one(session_id)

    def _run_correct(self, transcripts: dict[str, SessionTranscript]) -> None:
        def fn(session_id: str) -> tuple[str, bytes]:
            corrected = correct_transcript(transcripts[session_id], self.llm)
            return session_id, _dump(corrected.to_dict())

        self._map_sessions(sorted(transcripts), fn, "01_correct")

    def _run_summarize(self, transcripts: dict[str, SessionTranscript]) -> None:
        def fn(session_id: str) -> tuple[str, bytes]:
            transcript = transcripts[session_id]
            corrected_doc = json.loads(
                self._session_checkpoint("01_correct", session_id).read_text(encoding="utf-8"))
            corrected = CorrectedSession.from_dict(corrected_doc)
            script = self.resolve_script(transcript.script_id)
            record = summarize_to_records(transcript, corrected, script, self.llm)
            return session_id, _dump(record.to_dict())

        self._map_sessions(sorted(transcripts), fn, "02_summarize")

    def _load_records(self, session_ids: list[str]) -> list[StructuredRecord]:
        records = []
        for session_id in sorted(session_ids):
            doc = json.loads(
                self._session_checkpoint("02_summarize", session_id).read_text(encoding="utf-8"))
            themes = sorted(doc.get("themes", {}).keys())
            records.append(parse_record(doc, themes))
        return records

    def _run_analysis(self, session_ids: list[str]) -> None:
        records = self._load_records(session_ids)
        report = analyze(records, self.llm, self.config.extra_queries)
        payload = _dump(report.to_dict())
        _write_atomic(self._stage_dir("03_analysis") / "report.json", payload)
        _write_atomic(self.run_dir / "report.json", payload)

    def _read_report(self) -> AnalysisReport:
        doc = json.loads((self.run_dir / "report.json").read_text(encoding="utf-8"))
        return AnalysisReport.from_dict(doc)

    def _run_slides(self) -> None:
        report = self._read_report()
        spec = generate_slide_content(report, self.llm,
                                      event_name=self.config.event_name,
                                      date=self.config.event_date,
                                      min_slides=self.config.min_slides,
                                      max_slides=self.config.max_slides)
        _write_atomic(self._stage_dir("04_slides") / "deck.json", _dump(spec.to_dict()))
        _write_atomic(self.run_dir / "deck.md", render_slides(spec).encode("utf-8"))

    def _run_script(self) -> None:
        report = self._read_report()
        spec = SlideDeckSpec.from_dict(json.loads(
            (self._stage_dir("04_slides") / "deck.json").read_text(encoding="utf-8")))
        script = generate_presentation_script(report, spec, self.llm,
                                              word_budget=self.config.word_budget)
        _write_atomic(self._stage_dir("05_script") / "narration.json", _dump(script.to_dict()))
        _write_atomic(self.run_dir / "narration.txt",
                      render_narration(script, spec).encode("utf-8"))

    # -- orchestration -----------------------------------------------------

    def run(self, session_ids: Sequence[str]) -> PipelineResult:
        if not session_ids:
            raise EmptyInputError("no sessions given to the pipeline")
        ordered = sorted(dict.fromkeys(session_ids))
        self.run_dir.mkdir(parents=True, exist_ok=True)
        manifest = self._load_manifest(ordered)
        completed: list[str] = list(manifest["completed_stages"])
        transcripts = self._load_transcripts(ordered)

        executed: list[str] = []
        result = PipelineResult(run_dir=self.run_dir, executed_stages=executed)
        runners = {
            "01_correct": lambda: self._run_correct(transcripts),
            "02_summarize": lambda: self._run_summarize(transcripts),
            "03_analysis": lambda: self._run_analysis(ordered),
            "04_slides": self._run_slides,
            "05_script": self._run_script,
        }
        for stage in STAGES:
            if stage in completed:
                logger.info("stage %s already complete; skipping", stage)
                continue
            logger.info("running stage %s", stage)
            try:
                runners[stage]()
            except StageError as exc:
                raise exc.with_checkpoint(str(self._stage_dir(stage))) from exc
            except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
                raise StageError(stage, str(exc),
                                 checkpoint_path=str(self._stage_dir(stage))) from exc
            executed.append(stage)
            completed.append(stage)
            manifest["completed_stages"] = completed
            self._save_manifest(manifest)
            if self.config.halt_after_stage == stage:
                raise HaltRequested(f"halted after stage {stage}")

        result.report = self._read_report()
        return result


def run_pipeline(
    store: TranscriptStore,
    session_ids: Sequence[str],
    config: PipelineConfig,
    llm: LanguageModelClient,
    script_resolver: Callable[[str], InterviewScript] | None = None,
) -> PipelineResult:
    """Execute all five stages (resuming past completed ones) and return the artifacts."""
    if script_resolver is None:
        from ..dialogue.script import ScriptRegistry

        script_resolver = ScriptRegistry().get
    runner = PipelineRunner(store, config, llm, script_resolver)
    return runner.run(session_ids)
