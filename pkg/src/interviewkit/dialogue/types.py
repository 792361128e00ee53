"""Core domain types for the interview dialogue manager."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class Sentiment(str, Enum):
    POSITIVE = "positive"
    NEUTRAL = "neutral"
    NEGATIVE = "negative"


class Agreement(str, Enum):
    AGREE = "agree"
    DISAGREE = "disagree"
    UNCLEAR = "unclear"


class AsrStatus(str, Enum):
    OK = "ok"                            # text recognized
    EMPTY_WITH_VOICE = "empty_with_voice"  # voice activity but no transcription
    SILENCE = "silence"                  # no voice activity at all


class Proficiency(str, Enum):
    LOW = "low"
    STANDARD = "standard"


class Phase(str, Enum):
    AWAITING_ANSWER = "awaiting_answer"
    CLOSING = "closing"
    DONE = "done"


class RepairKind(str, Enum):
    NONE = "none"
    REPEAT_QUESTION = "repeat_question"
    ENCOURAGE = "encourage"
    MINIMAL_BACKCHANNEL = "minimal_backchannel"
    INTERIM_FILLER = "interim_filler"


class ActionKind(str, Enum):
    ASK = "ask"
    REPEAT = "repeat"
    ENCOURAGE = "encourage"
    FILLER = "filler"
    CLOSE = "close"
    # Delivery channel for a minimal-backchannel repair: the session layer
    # plays an acknowledgement token instead of a spoken sentence.
    BACKCHANNEL = "backchannel"


class NodSpeed(str, Enum):
    SLOW = "slow"
    FAST = "fast"


@dataclass(frozen=True)
class ProsodySummary:
    """Turn-level prosody digest coming out of the speech front end."""

    f0_mean: float = 0.0       # Hz, >= 0
    f0_slope_end: float = 0.0  # Hz/s over the final window
    power_mean: float = 0.0    # relative units

    def __post_init__(self) -> None:
        if self.f0_mean < 0:
            raise ValueError("f0_mean must be >= 0")


@dataclass(frozen=True)
class UserUtterance:
    """One participant turn as delivered by the recognition front end."""

    text: str
    duration_s: float = 0.0
    prosody: ProsodySummary = field(default_factory=ProsodySummary)
    asr_status: AsrStatus = AsrStatus.OK
    word_count: int = field(default=-1)

    def __post_init__(self) -> None:
        # word_count is always derived from the text; a client-supplied
        # value is ignored rather than trusted.
        from ..text import word_count as _wc
        object.__setattr__(self, "word_count", _wc(self.text))
        if self.asr_status is AsrStatus.EMPTY_WITH_VOICE:
            if self.text.strip():
                raise ValueError("empty_with_voice requires empty text")
            if self.duration_s <= 0:
                raise ValueError("empty_with_voice requires duration_s > 0")


@dataclass(frozen=True)
class UnderstandingResult:
    """Deterministic interpretation of one utterance against the script lexicons."""

    sentiment: Sentiment
    agreement: Agreement
    has_reason_keyword: bool
    word_count: int


@dataclass(frozen=True)
class RepairDecision:
    kind: RepairKind
    payload: str | None = None

    def __post_init__(self) -> None:
        if self.kind is RepairKind.NONE and self.payload is not None:
            raise ValueError("kind=none implies no payload")


@dataclass(frozen=True)
class NodPattern:
    frequency: float  # nods per second
    speed: NodSpeed


@dataclass(frozen=True)
class GestureTag:
    """Symbolic gesture event; ``nod`` carries its pattern, others are bare."""

    name: str  # open_palm | lean_back | bow | nod
    nod: NodPattern | None = None

    OPEN_PALM = "open_palm"
    LEAN_BACK = "lean_back"
    BOW = "bow"
    NOD = "nod"


@dataclass(frozen=True)
class FluencyProfile:
    """Rolling speech-rate estimate and the pacing parameters derived from it.

    ``rolling_wpm`` stays None until the first valid measurement; until then
    the profile is standard by definition.
    """

    rolling_wpm: float | None = None
    proficiency: Proficiency = Proficiency.STANDARD
    speech_rate_factor: float = 1.0
    turn_timeout_s: float = 3.0


@dataclass(frozen=True)
class SystemAction:
    """One system output turn selected by the dialogue engine."""

    kind: ActionKind
    text: str
    speech_rate_factor: float = 1.0
    gesture: GestureTag | None = None
    topic_id: str | None = None


@dataclass
class DialogueState:
    """Mutable position of one interview session inside the script FSM."""

    current_topic: str
    followups_asked: int = 0
    phase: Phase = Phase.AWAITING_ANSWER
    fluency: FluencyProfile = field(default_factory=FluencyProfile)
    history: list[tuple[str, UnderstandingResult]] = field(default_factory=list)
    # engine bookkeeping
    repairs_for_topic: int = 0
    followup_cursor: int = 0
    last_question_text: str = ""
