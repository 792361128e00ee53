"""Presentation narration: one spoken segment per slide, numbers injected."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

from ..errors import StageError
from ..text import word_count
from .client import LanguageModelClient
from .prompts import stage_prompt
from .records import AnalysisReport
from .slides import SlideDeckSpec, inject_percentages, value_index

logger = logging.getLogger(__name__)

STAGE = "05_script"

DEFAULT_WORD_BUDGET = 120


@dataclass(frozen=True)
class PresentationScript:
    segments: tuple[str, ...]

    def to_dict(self) -> dict:
        return {"segments": list(self.segments)}

    @classmethod
    def from_dict(cls, doc: dict) -> "PresentationScript":
        return cls(segments=tuple(str(s) for s in doc.get("segments", ())))


def _request_segments(llm: LanguageModelClient, payload: str) -> list[str]:
    raw = llm.complete(stage_prompt(STAGE), payload)
    try:
        doc = json.loads(raw)
        segments = doc["segments"]
        assert isinstance(segments, list)
        return [str(s) for s in segments]
    except (json.JSONDecodeError, KeyError, AssertionError, TypeError) as exc:
        raise StageError(STAGE, f"model narration output invalid: {exc}") from exc


def _violation(segments: list[str], n_slides: int, budget: int) -> str | None:
    if len(segments) != n_slides:
        return f"expected {n_slides} segments (one per slide), got {len(segments)}"
    over = [i + 1 for i, s in enumerate(segments) if word_count(s) > budget]
    if over:
        return f"segments over the {budget}-word budget: slides {over}"
    return None


def generate_presentation_script(
    report: AnalysisReport,
    spec: SlideDeckSpec,
    llm: LanguageModelClient,
    word_budget: int = DEFAULT_WORD_BUDGET,
) -> PresentationScript:
    """One narration segment per slide; a misaligned draft gets exactly one
    repair re-prompt before the stage fails."""
    payload = json.dumps({
        "slides": spec.to_dict()["slides"],
        "report": report.to_dict(),
        "word_budget": word_budget,
    }, ensure_ascii=False, sort_keys=True)

    segments = _request_segments(llm, payload)
    problem = _violation(segments, len(spec.slides), word_budget)
    if problem is not None:
        logger.warning("narration draft rejected (%s); re-prompting once", problem)
        repair_payload = json.dumps({
            "slides": spec.to_dict()["slides"],
            "report": report.to_dict(),
            "word_budget": word_budget,
            "validation_error": problem,
        }, ensure_ascii=False, sort_keys=True)
        segments = _request_segments(llm, repair_payload)
        problem = _violation(segments, len(spec.slides), word_budget)
        if problem is not None:
            raise StageError(STAGE, problem)

    index = value_index(report)
    return PresentationScript(segments=tuple(inject_percentages(s, index) for s in segments))


def render_narration(script: PresentationScript, spec: SlideDeckSpec) -> str:
    """Plain-text narration artifact, deterministic for a given script."""
    blocks = []
    for i, (segment, slide) in enumerate(zip(script.segments, spec.slides), start=1):
        blocks.append(f"Slide {i}: {slide.title}\n\n{segment}\n")
    return "\n".join(blocks)
