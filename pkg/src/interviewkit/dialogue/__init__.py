"""Dialogue manager: understanding, repair, fluency adaptation, and the interview FSM."""

from .engine import DEFAULT_ENGINE, EngineConfig, advance, initial_action, initial_state
from .fluency import DEFAULT_FLUENCY, FluencyConfig, initial_profile, update_fluency
from .questions import FollowupMode, generate_followup
from .repair import FillerPolicy, decide_repair
from .script import (
    END,
    InterviewScript,
    ScriptRegistry,
    Topic,
    build_script,
    default_script,
    load_script,
)
from .types import (
    ActionKind,
    Agreement,
    AsrStatus,
    DialogueState,
    FluencyProfile,
    GestureTag,
    NodPattern,
    NodSpeed,
    Phase,
    Proficiency,
    ProsodySummary,
    RepairDecision,
    RepairKind,
    Sentiment,
    SystemAction,
    UnderstandingResult,
    UserUtterance,
)
from .understanding import classify_sentiment, detect_agreement, needs_followup, understand

__all__ = [
    "ActionKind", "Agreement", "AsrStatus", "DEFAULT_ENGINE", "DEFAULT_FLUENCY",
    "DialogueState", "END", "EngineConfig", "FillerPolicy", "FluencyConfig",
    "FluencyProfile", "FollowupMode", "GestureTag", "InterviewScript", "NodPattern",
    "NodSpeed", "Phase", "Proficiency", "ProsodySummary", "RepairDecision",
    "RepairKind", "ScriptRegistry", "Sentiment", "SystemAction", "Topic", "UnderstandingResult",
    "UserUtterance", "advance", "build_script", "classify_sentiment", "decide_repair",
    "default_script", "detect_agreement", "generate_followup", "initial_action",
    "initial_profile", "initial_state", "load_script", "needs_followup", "understand",
    "update_fluency",
]
