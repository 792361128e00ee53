"""Structured per-session records and the aggregated analysis report."""

from __future__ import annotations

from dataclasses import dataclass, field

STANCES = ("agree", "disagree", "unclear")
SENTIMENTS = ("positive", "neutral", "negative")
EXPERIENCE_LABELS = ("positive", "neutral", "negative")


class RecordValidationError(ValueError):
    """Model output violated the record schema; ``field`` names the offender."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field_name = field_name


@dataclass(frozen=True)
class ThemeAnswer:
    stance: str
    sentiment: str
    motivation: str


@dataclass(frozen=True)
class StructuredRecord:
    session_id: str
    themes: dict[str, ThemeAnswer]
    experience_label: str
    experience_reason: str

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "themes": {theme: {"stance": a.stance, "sentiment": a.sentiment,
                               "motivation": a.motivation}
                       for theme, a in self.themes.items()},
            "overall_experience": {"label": self.experience_label,
                                   "reason": self.experience_reason},
        }


def parse_record(doc: object, expected_themes: list[str]) -> StructuredRecord:
    """Validate a model-produced record document field by field.

    Raises :class:`RecordValidationError` naming the first offending field,
    which is fed back to the model on the single repair re-prompt.
    """
    if not isinstance(doc, dict):
        raise RecordValidationError("$", "record must be a JSON object")
    session_id = doc.get("session_id")
    if not isinstance(session_id, str) or not session_id:
        raise RecordValidationError("session_id", "must be a non-empty string")

    themes_doc = doc.get("themes")
    if not isinstance(themes_doc, dict):
        raise RecordValidationError("themes", "must be an object keyed by theme")
    missing = [t for t in expected_themes if t not in themes_doc]
    if missing:
        raise RecordValidationError("themes", f"missing themes: {missing}")
    extra = [t for t in themes_doc if t not in expected_themes]
    if extra:
        raise RecordValidationError("themes", f"unknown themes: {extra}")

    themes: dict[str, ThemeAnswer] = {}
    for theme in expected_themes:
        entry = themes_doc[theme]
        if not isinstance(entry, dict):
            raise RecordValidationError(f"themes.{theme}", "must be an object")
        stance = entry.get("stance")
        if stance not in STANCES:
            raise RecordValidationError(f"themes.{theme}.stance",
                                        f"must be one of {STANCES}, got {stance!r}")
        sentiment = entry.get("sentiment")
        if sentiment not in SENTIMENTS:
            raise RecordValidationError(f"themes.{theme}.sentiment",
                                        f"must be one of {SENTIMENTS}, got {sentiment!r}")
        motivation = entry.get("motivation", "")
        if not isinstance(motivation, str):
            raise RecordValidationError(f"themes.{theme}.motivation", "must be a string")
        themes[theme] = ThemeAnswer(stance=stance, sentiment=sentiment, motivation=motivation)

    experience = doc.get("overall_experience")
    if not isinstance(experience, dict):
        raise RecordValidationError("overall_experience", "must be an object")
    label = experience.get("label")
    if label not in EXPERIENCE_LABELS:
        raise RecordValidationError("overall_experience.label",
                                    f"must be one of {EXPERIENCE_LABELS}, got {label!r}")
    reason = experience.get("reason", "")
    if not isinstance(reason, str):
        raise RecordValidationError("overall_experience.reason", "must be a string")

    return StructuredRecord(session_id=session_id, themes=themes,
                            experience_label=label, experience_reason=reason)


def vacuous_record(session_id: str, expected_themes: list[str]) -> StructuredRecord:
    """Record for a session with no usable user turns: everything unclear."""
    return StructuredRecord(
        session_id=session_id,
        themes={t: ThemeAnswer("unclear", "neutral", "") for t in expected_themes},
        experience_label="neutral",
        experience_reason="",
    )


@dataclass(frozen=True)
class ThemeAnalysis:
    stances: dict[str, float]
    motivations: tuple[str, ...]


@dataclass(frozen=True)
class AnalysisReport:
    n_sessions: int
    distribution: dict[str, float]               # experience label -> percent
    top_reasons: dict[str, tuple[str, ...]]
    per_theme: dict[str, ThemeAnalysis] = field(default_factory=dict)
    additional_queries: tuple[dict, ...] = ()

    def to_dict(self) -> dict:
        return {
            "n_sessions": self.n_sessions,
            "distribution": dict(self.distribution),
            "top_reasons": {k: list(v) for k, v in self.top_reasons.items()},
            "per_theme": {theme: {"stances": dict(a.stances),
                                  "motivations": list(a.motivations)}
                          for theme, a in self.per_theme.items()},
            "additional_queries": [dict(q) for q in self.additional_queries],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "AnalysisReport":
        return cls(
            n_sessions=int(doc["n_sessions"]),
            distribution={k: float(v) for k, v in doc["distribution"].items()},
            top_reasons={k: tuple(v) for k, v in doc.get("top_reasons", {}).items()},
            per_theme={theme: ThemeAnalysis(
                stances={k: float(v) for k, v in entry["stances"].items()},
                motivations=tuple(entry.get("motivations", ())))
                for theme, entry in doc.get("per_theme", {}).items()},
            additional_queries=tuple(doc.get("additional_queries", ())),
        )
