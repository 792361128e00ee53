from __future__ import annotations

import json

import pytest

from interviewkit.errors import ClientError, MockFixtureMiss, StageError
from interviewkit.pipeline import (
    MockLanguageModel,
    correct_transcript,
    fixture_key,
    stage_prompt,
    summarize_to_records,
)
from interviewkit.pipeline.prompts import identify_stage
from interviewkit.session import TraceTurn, run_trace

FULL_ANSWERS = [
    "I value accuracy because wrong answers cost trust.",
    "Yeah, not only human-like but also considering the user's preferences.",
    "Yes, because small flaws can make it relatable.",
    "Clear rules, because misuse is a real risk.",
    "Yeah, it was a really interesting experience because this is my first time.",
]


@pytest.fixture()
def recorded_session(script):
    transcript, _ = run_trace(script, [TraceTurn(t, 4.0) for t in FULL_ANSWERS], "fx-1")
    return transcript


class FlakyClient:
    """Raises a client error for selected stages until its fuse burns out."""

    def __init__(self, inner, fail_stage: str, failures: int = 10**9):
        self.inner = inner
        self.fail_stage = fail_stage
        self.remaining = failures

    def complete(self, prompt: str, input: str) -> str:
        if identify_stage(prompt) == self.fail_stage and self.remaining > 0:
            self.remaining -= 1
            raise ClientError("injected timeout after retries")
        return self.inner.complete(prompt, input)


class TestCorrect:
    def test_identity_mock_returns_input(self, recorded_session):
        corrected = correct_transcript(recorded_session, MockLanguageModel())
        assert len(corrected.corrections) == len(FULL_ANSWERS)
        for c in corrected.corrections:
            assert c.corrected == c.original

    def test_pinned_fixture_correction(self, script):
        mock = MockLanguageModel()
        mock.pin(stage_prompt("01_correct"), "i think it should be human like",
                 "I think it should be human-like.")
        transcript, _ = run_trace(script, [TraceTurn("i think it should be human like", 4.0)],
                                  "fx-asr")
        corrected = correct_transcript(transcript, mock)
        assert corrected.corrections[0].original == "i think it should be human like"
        assert corrected.corrections[0].corrected == "I think it should be human-like."

    def test_prompt_edit_invalidates_pinned_fixture(self):
        key_now = fixture_key(stage_prompt("01_correct"), "sample")
        key_edited = fixture_key(stage_prompt("01_correct") + "\nEDIT", "sample")
        assert key_now != key_edited
        strict = MockLanguageModel(fixtures={key_edited: "out"}, strict=True)
        with pytest.raises(MockFixtureMiss):
            strict.complete(stage_prompt("01_correct"), "sample")

    def test_client_failure_becomes_stage_error(self, recorded_session):
        flaky = FlakyClient(MockLanguageModel(), "01_correct")
        with pytest.raises(StageError) as excinfo:
            correct_transcript(recorded_session, flaky)
        assert excinfo.value.stage == "01_correct"
        assert excinfo.value.session_id == recorded_session.session_id


class TestSummarize:
    def test_dialogue3_style_session_yields_agree(self, script, recorded_session):
        mock = MockLanguageModel()
        corrected = correct_transcript(recorded_session, mock)
        record = summarize_to_records(recorded_session, corrected, script, mock)
        assert record.themes["human_likeness"].stance == "agree"
        assert record.experience_label == "positive"
        assert set(record.themes) == set(script.theme_ids())

    def test_invalid_stance_repair_then_error(self, script, recorded_session):
        def bad_summarize(input: str) -> str:
            doc = json.loads(input)
            themes = {t: {"stance": "maybe", "sentiment": "neutral", "motivation": ""}
                      for t in doc["themes"]}
            return json.dumps({"session_id": doc["session_id"], "themes": themes,
                               "overall_experience": {"label": "neutral", "reason": ""}})

        mock = MockLanguageModel(behaviors={"02_summarize": bad_summarize})
        corrected = correct_transcript(recorded_session, MockLanguageModel())
        with pytest.raises(StageError) as excinfo:
            summarize_to_records(recorded_session, corrected, script, mock)
        assert "stance" in str(excinfo.value)
        assert mock.calls_for_stage("02_summarize") == 2  # first try + one repair

    def test_repair_prompt_can_fix_the_record(self, script, recorded_session):
        calls = {"n": 0}

        def flaky_summarize(input: str) -> str:
            calls["n"] += 1
            doc = json.loads(input)
            stance = "maybe" if calls["n"] == 1 else "agree"
            themes = {t: {"stance": stance, "sentiment": "neutral", "motivation": ""}
                      for t in doc["themes"]}
            return json.dumps({"session_id": doc["session_id"], "themes": themes,
                               "overall_experience": {"label": "positive", "reason": "fun"}})

        mock = MockLanguageModel(behaviors={"02_summarize": flaky_summarize})
        corrected = correct_transcript(recorded_session, MockLanguageModel())
        record = summarize_to_records(recorded_session, corrected, script, mock)
        assert calls["n"] == 2
        assert record.themes["human_likeness"].stance == "agree"

    def test_empty_session_vacuous_record(self, script):
        transcript, _ = run_trace(script, [], "fx-empty")
        corrected = correct_transcript(transcript, MockLanguageModel())
        record = summarize_to_records(transcript, corrected, script, MockLanguageModel())
        assert all(a.stance == "unclear" for a in record.themes.values())
        assert record.experience_label == "neutral"
