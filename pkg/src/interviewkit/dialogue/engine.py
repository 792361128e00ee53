"""Finite-state interview flow: one user turn in, one system action out.

Per turn the engine applies, in order:

1. repair screening (repeat / encourage / minimal backchannel), capped per
   topic so a string of breakdowns can never stall the interview;
2. the follow-up rule (short or reason-free answers get probed, within the
   topic's follow-up budget);
3. agreement routing to the next topic, or the sentiment-keyed closing when
   the route ends.

Every emitted action carries the speech-rate factor of the current fluency
profile, which is refreshed from the incoming turn before anything else.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

from ..errors import SessionClosedError
from .fluency import FluencyConfig, initial_profile, update_fluency
from .questions import FollowupMode, generate_followup
from .repair import decide_repair
from .script import END, InterviewScript, Topic
from .types import (
    ActionKind,
    AsrStatus,
    DialogueState,
    GestureTag,
    Phase,
    RepairKind,
    SystemAction,
    UserUtterance,
)
from .understanding import needs_followup, understand

if TYPE_CHECKING:  # pragma: no cover
    from ..pipeline.client import LanguageModelClient


@dataclass(frozen=True)
class EngineConfig:
    repair_cap: int = 2  # repairs per topic before force-advancing
    followup_mode: FollowupMode = FollowupMode.TEMPLATE
    fluency: FluencyConfig = field(default_factory=FluencyConfig)


DEFAULT_ENGINE = EngineConfig()

_REPAIR_ACTION_KIND = {
    RepairKind.REPEAT_QUESTION: ActionKind.REPEAT,
    RepairKind.ENCOURAGE: ActionKind.ENCOURAGE,
    RepairKind.MINIMAL_BACKCHANNEL: ActionKind.BACKCHANNEL,
}

ACTION_REPAIR_KIND = {v: k for k, v in _REPAIR_ACTION_KIND.items()}


def initial_state(script: InterviewScript, start_topic: str | None = None,
                  config: EngineConfig = DEFAULT_ENGINE) -> DialogueState:
    topic = script.topic(start_topic) if start_topic else script.first_topic
    return DialogueState(
        current_topic=topic.id,
        fluency=initial_profile(config.fluency),
        last_question_text=topic.base_question,
    )


def initial_action(script: InterviewScript, state: DialogueState) -> SystemAction:
    """The opening question for a fresh session."""
    topic = script.topic(state.current_topic)
    return SystemAction(
        kind=ActionKind.ASK,
        text=topic.base_question,
        speech_rate_factor=state.fluency.speech_rate_factor,
        gesture=GestureTag(GestureTag.OPEN_PALM),
        topic_id=topic.id,
    )


def _clone(state: DialogueState, **changes) -> DialogueState:
    base = replace(state)
    base.history = list(state.history)
    for key, value in changes.items():
        setattr(base, key, value)
    return base


def advance(
    state: DialogueState,
    script: InterviewScript,
    utterance: UserUtterance,
    config: EngineConfig = DEFAULT_ENGINE,
    llm: "LanguageModelClient | None" = None,
) -> tuple[DialogueState, SystemAction]:
    """Consume one user turn and return the successor state plus the system action.

    The input state is never mutated. Raises :class:`SessionClosedError` when
    the dialogue has already closed.
    """
    if state.phase is not Phase.AWAITING_ANSWER:
        raise SessionClosedError(f"dialogue is in phase {state.phase.value}; no further turns accepted")

    topic: Topic = script.topic(state.current_topic)
    fluency = update_fluency(state.fluency, utterance, config.fluency)
    rate = fluency.speech_rate_factor

    repair = decide_repair(utterance, script)
    if repair.kind is not RepairKind.NONE and state.repairs_for_topic < config.repair_cap:
        text = state.last_question_text if repair.kind is RepairKind.REPEAT_QUESTION else repair.payload or ""
        next_state = _clone(state, fluency=fluency,
                            repairs_for_topic=state.repairs_for_topic + 1)
        return next_state, SystemAction(
            kind=_REPAIR_ACTION_KIND[repair.kind], text=text,
            speech_rate_factor=rate, topic_id=topic.id)
    # Past the repair cap a broken turn falls through and is routed like a
    # normal answer, which is what guarantees termination.

    result = understand(utterance, script)
    history = list(state.history) + [(topic.id, result)]

    if (utterance.asr_status is AsrStatus.OK
            and state.followups_asked < topic.max_followups
            and needs_followup(utterance, script)):
        context = [("system", state.last_question_text), ("user", utterance.text)]
        question, cursor = generate_followup(
            context, config.followup_mode, llm, script, state.followup_cursor)
        next_state = _clone(state, fluency=fluency, history=history,
                            followups_asked=state.followups_asked + 1,
                            followup_cursor=cursor, last_question_text=question)
        return next_state, SystemAction(
            kind=ActionKind.ASK, text=question, speech_rate_factor=rate,
            gesture=GestureTag(GestureTag.OPEN_PALM), topic_id=topic.id)

    target = topic.routing[result.agreement]
    if target == END:
        closing = script.closing_responses[result.sentiment]
        next_state = _clone(state, fluency=fluency, history=history, phase=Phase.CLOSING)
        return next_state, SystemAction(
            kind=ActionKind.CLOSE, text=closing, speech_rate_factor=rate,
            gesture=GestureTag(GestureTag.BOW), topic_id=topic.id)

    next_topic = script.topic(target)
    extensive = result.word_count >= script.extensive_answer_ceiling
    gesture = GestureTag(GestureTag.LEAN_BACK) if extensive else GestureTag(GestureTag.OPEN_PALM)
    next_state = _clone(state, fluency=fluency, history=history,
                        current_topic=target, followups_asked=0, repairs_for_topic=0,
                        last_question_text=next_topic.base_question)
    return next_state, SystemAction(
        kind=ActionKind.ASK, text=next_topic.base_question, speech_rate_factor=rate,
        gesture=gesture, topic_id=target)
