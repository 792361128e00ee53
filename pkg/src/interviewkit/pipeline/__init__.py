"""Chained-LLM post-interview workflow: correction, summarization, analysis,
slides, and narration, with checkpointed resumable runs."""

from .analysis import analyze, distribution, percentage
from .client import (
    ClientConfig,
    HttpLanguageModel,
    LanguageModelClient,
    MockLanguageModel,
    fixture_key,
)
from .narration import PresentationScript, generate_presentation_script, render_narration
from .prompts import STAGES, prompt_sha, stage_prompt
from .records import (
    AnalysisReport,
    RecordValidationError,
    StructuredRecord,
    ThemeAnalysis,
    ThemeAnswer,
    parse_record,
    vacuous_record,
)
from .runner import HaltRequested, PipelineConfig, PipelineResult, run_pipeline
from .slides import (
    Slide,
    SlideDeckSpec,
    TableRow,
    generate_slide_content,
    inject_percentages,
    parse_deck,
    render_slides,
    value_index,
)
from .stages import CorrectedSession, Correction, correct_transcript, summarize_to_records

__all__ = [
    "AnalysisReport", "ClientConfig", "CorrectedSession", "Correction",
    "HaltRequested", "HttpLanguageModel", "LanguageModelClient", "MockLanguageModel",
    "PipelineConfig", "PipelineResult", "PresentationScript", "RecordValidationError",
    "STAGES", "Slide", "SlideDeckSpec", "StructuredRecord", "TableRow",
    "ThemeAnalysis", "ThemeAnswer", "analyze", "correct_transcript", "distribution",
    "fixture_key", "generate_presentation_script", "generate_slide_content",
    "inject_percentages", "parse_deck", "parse_record", "percentage", "prompt_sha",
    "render_narration", "render_slides", "run_pipeline", "stage_prompt",
    "summarize_to_records", "vacuous_record", "value_index",
]
