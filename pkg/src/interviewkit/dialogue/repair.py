"""Conversational repair: breakdown detection and interim fillers."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..text import contains_phrase, tokenize
from .script import InterviewScript
from .types import AsrStatus, RepairDecision, RepairKind, UserUtterance


def decide_repair(utterance: UserUtterance, script: InterviewScript) -> RepairDecision:
    """Pick a repair move for a broken turn, or none for a clean one.

    Precedence: confusion phrases (repeat the question) are checked before
    giving-up phrases (encourage), so an utterance containing both triggers a
    repeat. Recognition failures with voice activity get a minimal verbal
    backchannel; full silence gets an encouragement.
    """
    tokens = tokenize(utterance.text)
    for phrase in script.confusion_phrases:
        if contains_phrase(tokens, tokenize(phrase)):
            return RepairDecision(RepairKind.REPEAT_QUESTION)
    for phrase in script.giving_up_phrases:
        if contains_phrase(tokens, tokenize(phrase)):
            return RepairDecision(RepairKind.ENCOURAGE, payload=script.encourage_responses[0])
    if utterance.asr_status is AsrStatus.EMPTY_WITH_VOICE:
        return RepairDecision(RepairKind.MINIMAL_BACKCHANNEL,
                              payload=script.minimal_backchannel_token)
    if utterance.asr_status is AsrStatus.SILENCE:
        return RepairDecision(RepairKind.ENCOURAGE, payload=script.encourage_responses[0])
    return RepairDecision(RepairKind.NONE)


@dataclass
class FillerPolicy:
    """Round-robin interim fillers to mask processing latency.

    A filler is emitted only when the measured delay exceeds the latency
    budget; successive triggers cycle through the script's filler list.
    """

    script: InterviewScript
    budget_ms: float = 1500.0
    _cursor: int = field(default=0, repr=False)

    def interim_filler(self, elapsed_ms: float) -> str | None:
        if elapsed_ms <= self.budget_ms:
            return None
        fillers = self.script.interim_fillers
        text = fillers[self._cursor % len(fillers)]
        self._cursor += 1
        return text
