"""Words-per-minute tracking and speaking-pace adaptation.

Participants at or below 75 WPM are classified low-proficiency; for them the
system slows its own speech and waits longer before taking the turn.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .types import FluencyProfile, Proficiency, UserUtterance

logger = logging.getLogger(__name__)

LOW_PROFICIENCY_WPM = 75.0


@dataclass(frozen=True)
class FluencyConfig:
    threshold_wpm: float = LOW_PROFICIENCY_WPM
    smoothing: float = 0.5          # weight on the newest turn
    standard_rate_factor: float = 1.0
    low_rate_factor: float = 0.8
    standard_timeout_s: float = 3.0
    low_timeout_s: float = 6.0


DEFAULT_FLUENCY = FluencyConfig()


def initial_profile(config: FluencyConfig = DEFAULT_FLUENCY) -> FluencyProfile:
    return FluencyProfile(
        rolling_wpm=None,
        proficiency=Proficiency.STANDARD,
        speech_rate_factor=config.standard_rate_factor,
        turn_timeout_s=config.standard_timeout_s,
    )


def update_fluency(profile: FluencyProfile, utterance: UserUtterance,
                   config: FluencyConfig = DEFAULT_FLUENCY) -> FluencyProfile:
    """Fold one turn's speech rate into the rolling WPM estimate.

    Silent turns carry no measurement and leave the profile untouched. A turn
    with words but a non-positive duration is an invalid measurement: it is
    logged and excluded, and the profile is returned unchanged.
    """
    if utterance.word_count == 0:
        return profile
    if utterance.duration_s <= 0:
        logger.warning("invalid fluency measurement: %d words in %.3f s; turn excluded",
                       utterance.word_count, utterance.duration_s)
        return profile

    turn_wpm = utterance.word_count / (utterance.duration_s / 60.0)
    if profile.rolling_wpm is None:
        rolling = turn_wpm
    else:
        rolling = config.smoothing * turn_wpm + (1.0 - config.smoothing) * profile.rolling_wpm

    if rolling <= config.threshold_wpm:
        return FluencyProfile(
            rolling_wpm=rolling,
            proficiency=Proficiency.LOW,
            speech_rate_factor=config.low_rate_factor,
            turn_timeout_s=config.low_timeout_s,
        )
    return FluencyProfile(
        rolling_wpm=rolling,
        proficiency=Proficiency.STANDARD,
        speech_rate_factor=config.standard_rate_factor,
        turn_timeout_s=config.standard_timeout_s,
    )
