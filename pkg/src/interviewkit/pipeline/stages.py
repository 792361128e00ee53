"""Per-session pipeline stages: ASR-error correction and summarization."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

from ..dialogue import InterviewScript
from ..errors import ClientError, StageError
from ..transcript import EventKind, SessionTranscript
from .client import LanguageModelClient
from .prompts import stage_prompt
from .records import RecordValidationError, StructuredRecord, parse_record, vacuous_record

logger = logging.getLogger(__name__)

CORRECT_STAGE = "01_correct"
SUMMARIZE_STAGE = "02_summarize"


@dataclass(frozen=True)
class Correction:
    seq: int            # seq of the user_utterance event in the transcript
    original: str
    corrected: str


@dataclass(frozen=True)
class CorrectedSession:
    session_id: str
    corrections: tuple[Correction, ...]

    def corrected_text(self, seq: int, fallback: str) -> str:
        for c in self.corrections:
            if c.seq == seq:
                return c.corrected
        return fallback

    def to_dict(self) -> dict:
        return {"session_id": self.session_id,
                "corrections": [{"seq": c.seq, "original": c.original,
                                 "corrected": c.corrected}
                                for c in self.corrections]}

    @classmethod
    def from_dict(cls, doc: dict) -> "CorrectedSession":
        return cls(session_id=str(doc["session_id"]),
                   corrections=tuple(Correction(int(c["seq"]), str(c["original"]),
                                                str(c["corrected"]))
                                     for c in doc.get("corrections", ())))


def correct_transcript(transcript: SessionTranscript,
                       llm: LanguageModelClient) -> CorrectedSession:
    """Run every recognized user utterance through the correction model.

    The original text is kept next to the correction for audit; non-text
    events are untouched. A client failure surfaces as a stage error so the
    run can checkpoint and resume.
    """
    prompt = stage_prompt(CORRECT_STAGE)
    corrections: list[Correction] = []
    for event in transcript.events:
        if event.kind is not EventKind.USER_UTTERANCE:
            continue
        original = str(event.payload.get("text", ""))
        if not original.strip():
            continue
        try:
            corrected = llm.complete(prompt, original)
        except ClientError as exc:
            raise StageError(CORRECT_STAGE, str(exc),
                             session_id=transcript.session_id) from exc
        corrections.append(Correction(seq=event.seq, original=original,
                                      corrected=corrected.strip()))
    return CorrectedSession(session_id=transcript.session_id,
                            corrections=tuple(corrections))


def _dialogue_view(transcript: SessionTranscript, corrected: CorrectedSession,
                   script: InterviewScript) -> dict:
    """Group corrected Q/A pairs by theme for the summarization model."""
    themes = script.theme_ids()
    dialogue: list[dict] = []
    experience: list[dict] = []
    current_topic: str | None = None
    current_question = ""
    for event in transcript.events:
        if event.kind is EventKind.SYSTEM_UTTERANCE:
            if event.payload.get("kind") in ("ask", "repeat"):
                current_topic = event.payload.get("topic_id")
                current_question = str(event.payload.get("text", ""))
        elif event.kind is EventKind.USER_UTTERANCE:
            text = corrected.corrected_text(event.seq, str(event.payload.get("text", "")))
            if not text.strip() or current_topic is None:
                continue
            entry = {"theme": current_topic, "question": current_question, "answer": text}
            if current_topic == script.experience_topic_id:
                experience.append({"question": current_question, "answer": text})
            elif current_topic in themes:
                dialogue.append(entry)
    return {"session_id": transcript.session_id, "themes": themes,
            "dialogue": dialogue, "experience": experience}


def summarize_to_records(
    transcript: SessionTranscript,
    corrected: CorrectedSession,
    script: InterviewScript,
    llm: LanguageModelClient,
) -> StructuredRecord:
    """Summarize one corrected session into a validated structured record.

    A schema violation in the model output triggers exactly one re-prompt
    with the validation error appended; a second violation fails the stage
    naming the offending field.
    """
    view = _dialogue_view(transcript, corrected, script)
    themes = view["themes"]
    if not view["dialogue"] and not view["experience"]:
        return vacuous_record(transcript.session_id, themes)

    prompt = stage_prompt(SUMMARIZE_STAGE)
    payload = json.dumps(view, ensure_ascii=False, sort_keys=True)
    try:
        raw = llm.complete(prompt, payload)
    except ClientError as exc:
        raise StageError(SUMMARIZE_STAGE, str(exc),
                         session_id=transcript.session_id) from exc

    def _try_parse(text: str) -> StructuredRecord:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise RecordValidationError("$", f"output is not valid JSON: {exc}") from exc
        return parse_record(doc, themes)

    try:
        return _try_parse(raw)
    except RecordValidationError as first_error:
        logger.warning("record for %s rejected (%s); re-prompting once",
                       transcript.session_id, first_error)
        repair_view = dict(view)
        repair_view["validation_error"] = str(first_error)
        repair_payload = json.dumps(repair_view, ensure_ascii=False, sort_keys=True)
        try:
            raw = llm.complete(prompt, repair_payload)
        except ClientError as exc:
            raise StageError(SUMMARIZE_STAGE, str(exc),
                             session_id=transcript.session_id) from exc
        try:
            return _try_parse(raw)
        except RecordValidationError as second_error:
            raise StageError(SUMMARIZE_STAGE,
                             f"record schema violation after repair attempt: {second_error}",
                             session_id=transcript.session_id) from second_error
