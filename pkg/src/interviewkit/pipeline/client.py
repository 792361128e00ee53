"""Language-model clients for the post-interview pipeline.

Every stage talks to a client through one call shape:
``complete(prompt, input) -> str``. The mock variant is fully deterministic:
exact outputs can be pinned per (prompt, input) fixture key, and anything
unpinned falls through to a deterministic built-in behavior for the stage
the prompt belongs to. The HTTP variant speaks an OpenAI-style chat
completion endpoint configured through environment variables; the API key
is never logged or exposed in reprs.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Protocol

from ..errors import ClientError, MockFixtureMiss
from .prompts import identify_stage

logger = logging.getLogger(__name__)

ENV_ENDPOINT = "INTERVIEWKIT_LLM_ENDPOINT"
ENV_MODEL = "INTERVIEWKIT_LLM_MODEL"
ENV_API_KEY = "INTERVIEWKIT_LLM_API_KEY"


class LanguageModelClient(Protocol):
    def complete(self, prompt: str, input: str) -> str:  # noqa: A002 - interface name
        ...


def fixture_key(prompt: str, input: str) -> str:
    """Stable key over the full prompt and input; prompt edits change the key."""
    digest = hashlib.sha256()
    digest.update(prompt.encode("utf-8"))
    digest.update(b"\x00")
    digest.update(input.encode("utf-8"))
    return digest.hexdigest()[:24]


@dataclass
class ClientConfig:
    endpoint: str = ""
    model_id: str = ""
    api_key: str = field(default="", repr=False)
    temperature: float = 0.0
    timeout_s: float = 30.0
    retry_budget: int = 2
    backoff_s: float = 0.5

    @classmethod
    def from_env(cls, **overrides) -> "ClientConfig":
        cfg = cls(
            endpoint=os.environ.get(ENV_ENDPOINT, ""),
            model_id=os.environ.get(ENV_MODEL, ""),
            api_key=os.environ.get(ENV_API_KEY, ""),
        )
        for key, value in overrides.items():
            setattr(cfg, key, value)
        return cfg


# correction and summarization must be reproducible; creative stages follow
# the configured temperature
_DETERMINISTIC_STAGES = {"01_correct": 0.0, "02_summarize": 0.0}


class HttpLanguageModel:
    """OpenAI-style chat-completion client with retries and backoff."""

    def __init__(self, config: ClientConfig | None = None, sleep: Callable[[float], None] = time.sleep):
        self.config = config or ClientConfig.from_env()
        if not self.config.endpoint:
            raise ClientError(f"no endpoint configured (set {ENV_ENDPOINT})")
        self._sleep = sleep

    def _temperature(self, prompt: str) -> float:
        return _DETERMINISTIC_STAGES.get(identify_stage(prompt), self.config.temperature)

    def complete(self, prompt: str, input: str) -> str:
        import httpx

        body = {
            "model": self.config.model_id,
            "temperature": self._temperature(prompt),
            "messages": [
                {"role": "system", "content": prompt},
                {"role": "user", "content": input},
            ],
        }
        headers = {}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        last_error: Exception | None = None
        for attempt in range(self.config.retry_budget + 1):
            try:
                response = httpx.post(self.config.endpoint, json=body, headers=headers,
                                      timeout=self.config.timeout_s)
                response.raise_for_status()
                doc = response.json()
                return doc["choices"][0]["message"]["content"]
            except Exception as exc:  # noqa: BLE001 - every failure is retryable here
                last_error = exc
                logger.warning("model call failed (attempt %d/%d): %s",
                               attempt + 1, self.config.retry_budget + 1, type(exc).__name__)
                if attempt < self.config.retry_budget:
                    self._sleep(self.config.backoff_s * (2 ** attempt))
        raise ClientError(f"model call failed after {self.config.retry_budget + 1} attempts: "
                          f"{type(last_error).__name__}")


class MockLanguageModel:
    """Deterministic stand-in used by tests and ``--mock`` runs.

    Outputs resolve in order: pinned fixture for the exact (prompt, input)
    pair, then a per-stage behavior override, then the built-in behavior for
    the stage identified from the prompt. ``strict=True`` turns a fixture
    miss into an error so that prompt-template edits fail loudly.
    """

    def __init__(self, fixtures: dict[str, str] | None = None, strict: bool = False,
                 behaviors: dict[str, Callable[[str], str]] | None = None):
        self.fixtures = dict(fixtures or {})
        self.strict = strict
        self.behaviors = dict(behaviors or {})
        self.calls: list[tuple[str, str]] = []  # (stage, fixture key)
        self._lock = threading.Lock()

    def pin(self, prompt: str, input: str, output: str) -> None:
        self.fixtures[fixture_key(prompt, input)] = output

    def calls_for_stage(self, stage: str) -> int:
        with self._lock:
            return sum(1 for s, _ in self.calls if s == stage)

    def complete(self, prompt: str, input: str) -> str:
        stage = identify_stage(prompt)
        key = fixture_key(prompt, input)
        with self._lock:
            self.calls.append((stage, key))
        if key in self.fixtures:
            return self.fixtures[key]
        if self.strict:
            raise MockFixtureMiss(f"no fixture for stage {stage!r} key {key}")
        behavior = self.behaviors.get(stage)
        if behavior is not None:
            return behavior(input)
        return _default_behavior(stage, input)


# ----------------------------------------------------------------------
# built-in deterministic behaviors, one per stage

_AGREE_HINTS = ("yeah", "yes", "agree", "sure", "definitely")
_DISAGREE_HINTS = ("not really", "disagree", "nope", "no,", "no.")
_POSITIVE_HINTS = ("interesting", "great", "enjoy", "engaging", "love", "nice", "glad")
_NEGATIVE_HINTS = ("creepy", "bad", "boring", "uncomfortable", "repetitive", "discomfort")
_NEUTRAL_HINTS = ("error", "support", "mixed", "but")


def _words(text: str) -> list[str]:
    return text.lower().split()


def _stance(answer: str) -> str:
    lower = f" {answer.lower()} "
    for hint in _DISAGREE_HINTS:
        if hint in lower:
            return "disagree"
    for hint in _AGREE_HINTS:
        if hint in lower:
            return "agree"
    return "unclear"


def _sentiment(answer: str) -> str:
    lower = answer.lower()
    positive = any(h in lower for h in _POSITIVE_HINTS)
    negative = any(h in lower for h in _NEGATIVE_HINTS)
    if positive and not negative:
        return "positive"
    if negative and not positive:
        return "negative"
    return "neutral"


def _experience_label(answer: str) -> str:
    lower = answer.lower()
    positive = any(h in lower for h in _POSITIVE_HINTS)
    negative = any(h in lower for h in _NEGATIVE_HINTS)
    hedge = any(h in lower for h in _NEUTRAL_HINTS)
    if positive and not negative and not hedge:
        return "positive"
    if negative and not positive:
        return "negative"
    return "neutral"


def _behave_correct(input: str) -> str:
    return input


def _behave_summarize(input: str) -> str:
    doc = json.loads(input)
    themes_out = {}
    answers_by_theme: dict[str, list[str]] = {}
    for turn in doc.get("dialogue", []):
        answers_by_theme.setdefault(turn["theme"], []).append(turn["answer"])
    for theme in doc.get("themes", []):
        answers = [a for a in answers_by_theme.get(theme, []) if a.strip()]
        joined = " ".join(answers)
        themes_out[theme] = {
            "stance": _stance(joined) if joined else "unclear",
            "sentiment": _sentiment(joined) if joined else "neutral",
            "motivation": (answers[-1][:160] if answers else ""),
        }
    experience_answers = [t["answer"] for t in doc.get("experience", []) if t["answer"].strip()]
    exp = " ".join(experience_answers)
    record = {
        "session_id": doc.get("session_id", ""),
        "themes": themes_out,
        "overall_experience": {
            "label": _experience_label(exp) if exp else "neutral",
            "reason": (experience_answers[-1][:160] if experience_answers else ""),
        },
    }
    return json.dumps(record, ensure_ascii=False, sort_keys=True)


def _ranked(items: list[str], limit: int = 3) -> list[str]:
    counts: dict[str, int] = {}
    for item in items:
        cleaned = item.strip()
        if cleaned:
            counts[cleaned] = counts.get(cleaned, 0) + 1
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [item for item, _ in ordered[:limit]]


def _behave_analysis(input: str) -> str:
    doc = json.loads(input)
    top_reasons = {label: _ranked(entry.get("reasons", []))
                   for label, entry in doc.get("overall", {}).items()}
    clusters = {theme: _ranked(entry.get("motivations", []))
                for theme, entry in doc.get("themes", {}).items()}
    n = sum(entry.get("count", 0) for entry in doc.get("overall", {}).values())
    findings = [{"query": q, "finding": f"{q}: reviewed across {n} sessions."}
                for q in doc.get("queries", [])]
    return json.dumps({"top_reasons": top_reasons, "motivation_clusters": clusters,
                       "query_findings": findings}, ensure_ascii=False, sort_keys=True)


def _behave_slides(input: str) -> str:
    report = json.loads(input)
    n = report.get("n_sessions", 0)
    slides: list[dict] = [{"title": "Interview Findings", "bullets": [], "table": None}]
    reasons = report.get("top_reasons", {}).get("positive", [])
    overall_bullets = [f"{n} interview sessions analyzed",
                       "{{pct:Positive}} percent of participants reported a positive experience"]
    if reasons:
        overall_bullets.append(f"Most common positive reason: {reasons[0]}")
    slides.append({
        "title": "Overall Experience",
        "bullets": overall_bullets,
        # deliberately zeroed values: the orchestrator injects report numbers
        "table": [["Positive", "0.00"], ["Neutral", "0.00"], ["Negative", "0.00"]],
    })
    for theme in sorted(report.get("per_theme", {})):
        entry = report["per_theme"][theme]
        bullets = [f"Agreement: {{{{pct:{theme}:agree}}}} percent of participants"]
        bullets += [f"Motivation: {m}" for m in entry.get("motivations", [])[:2]]
        slides.append({
            "title": f"Theme: {theme}",
            "bullets": bullets,
            "table": [["agree", "0.00"], ["disagree", "0.00"], ["unclear", "0.00"]],
        })
        if len(slides) >= 14:
            break
    slides.append({"title": "Closing", "bullets": ["Thank you for listening."], "table": None})
    return json.dumps({"slides": slides}, ensure_ascii=False, sort_keys=True)


def _behave_script(input: str) -> str:
    doc = json.loads(input)
    segments = []
    for slide in doc.get("slides", []):
        title = slide.get("title", "")
        if title == "Interview Findings":
            segments.append("Hello everyone. I will now present what participants "
                            "shared with our interview system.")
        elif title == "Overall Experience":
            segments.append("Overall, {{pct:Positive}} percent of participants described "
                            "the experience as positive, {{pct:Neutral}} percent were neutral, "
                            "and {{pct:Negative}} percent reported a negative experience.")
        elif title.startswith("Theme: "):
            theme = title[len("Theme: "):]
            segments.append(f"On the topic of {theme.replace('_', ' ')}, "
                            f"{{{{pct:{theme}:agree}}}} percent of participants agreed.")
        else:
            segments.append("That concludes the findings. Thank you for listening.")
    return json.dumps({"segments": segments}, ensure_ascii=False, sort_keys=True)


_BEHAVIORS: dict[str, Callable[[str], str]] = {
    "01_correct": _behave_correct,
    "02_summarize": _behave_summarize,
    "03_analysis": _behave_analysis,
    "04_slides": _behave_slides,
    "05_script": _behave_script,
}


def _default_behavior(stage: str, input: str) -> str:
    behavior = _BEHAVIORS.get(stage)
    if behavior is None:
        return input  # unknown prompt: echo
    return behavior(input)
