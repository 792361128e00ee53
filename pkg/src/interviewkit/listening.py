"""Attentive listening: backchannel prediction/generation and turn-taking.

Prediction and generation are split. A predictor decides *when* to
acknowledge the speaker; form selection decides *what* the acknowledgement
is (verbal token plus optional head nod). The default predictor is a
prosody/silence heuristic standing in for a trained voice-activity
projection model; anything implementing :class:`BackchannelPredictor` can
be plugged in instead.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Protocol, Sequence

from .dialogue.types import FluencyProfile, NodPattern, NodSpeed
from .errors import ScriptError, StreamOrderError
from .resources import data_path


@dataclass(frozen=True)
class ProsodyFrame:
    """One pre-extracted prosody sample; ``f0`` is 0 when unvoiced."""

    t: float  # ms, non-decreasing within a stream
    voiced: bool
    f0: float = 0.0
    power: float = 0.0


@dataclass(frozen=True)
class BackchannelPlan:
    token: str
    asset_id: str
    at: float  # ms
    nod: NodPattern | None = None


class TurnKind(str, Enum):
    HOLD = "hold"
    YIELD_TO_SYSTEM = "yield_to_system"


@dataclass(frozen=True)
class TurnDecision:
    kind: TurnKind
    silence_ms: float


@dataclass(frozen=True)
class HeuristicThresholds:
    """Stand-in trigger conditions for the pluggable predictor.

    Fire once per pause when the speaker has produced at least
    ``min_voiced_ms`` of speech, then stays quiet for ``pause_trigger_ms``,
    with a non-rising pitch contour over the final ``slope_window_ms``.
    """

    min_voiced_ms: float = 1500.0
    pause_trigger_ms: float = 400.0
    slope_window_ms: float = 500.0


def _load_default_assets() -> dict[str, str]:
    return json.loads(data_path("backchannel_assets.json").read_text(encoding="utf-8"))


@dataclass(frozen=True)
class ListeningConfig:
    repertoire: tuple[str, ...] = ("hmm", "erm", "mhmm")
    nod_patterns: tuple[NodPattern, ...] = (
        NodPattern(1.0, NodSpeed.SLOW),
        NodPattern(2.0, NodSpeed.FAST),
    )
    asset_table: dict[str, str] = field(default_factory=_load_default_assets)
    thresholds: HeuristicThresholds = field(default_factory=HeuristicThresholds)

    def __post_init__(self) -> None:
        missing = [t for t in self.repertoire if t not in self.asset_table]
        if missing:
            raise ScriptError(f"backchannel tokens without audio assets: {missing}")


DEFAULT_LISTENING = ListeningConfig()


class BackchannelPredictor(Protocol):
    """Streaming predictor interface; external model adapters implement this."""

    def feed(self, frame: ProsodyFrame) -> float | None:
        """Consume one frame; return a trigger timestamp (ms) or None."""
        ...

    def reset(self) -> None:
        """Forget the current turn (called at every turn boundary)."""
        ...


class HeuristicBackchannelPredictor:
    """Default predictor: cumulative speech, then a pause, with falling pitch."""

    def __init__(self, thresholds: HeuristicThresholds | None = None):
        self.thresholds = thresholds or HeuristicThresholds()
        self.reset()

    def reset(self) -> None:
        self._last_t: float | None = None
        self._voiced_ms = 0.0
        self._last_voiced_t: float | None = None
        self._last_voiced = False
        self._voiced_samples: list[tuple[float, float]] = []  # (t, f0)
        self._triggered_this_pause = False

    def _slope_end(self) -> float:
        """f0 slope (Hz/s) over voiced samples in the final window."""
        if self._last_voiced_t is None:
            return 0.0
        cutoff = self._last_voiced_t - self.thresholds.slope_window_ms
        window = [(t, f0) for t, f0 in self._voiced_samples if t >= cutoff]
        if len(window) < 2 or len({t for t, _ in window}) < 2:
            return 0.0
        xs = [t / 1000.0 for t, _ in window]
        ys = [f0 for _, f0 in window]
        return statistics.linear_regression(xs, ys).slope

    def feed(self, frame: ProsodyFrame) -> float | None:
        if self._last_t is not None and frame.t < self._last_t:
            self.reset()
            raise StreamOrderError(
                f"prosody frame at t={frame.t} arrived after t={self._last_t}")

        if self._last_t is not None and self._last_voiced:
            self._voiced_ms += frame.t - self._last_t

        trigger: float | None = None
        if frame.voiced:
            self._last_voiced_t = frame.t
            self._voiced_samples.append((frame.t, frame.f0))
            self._triggered_this_pause = False
        elif (not self._triggered_this_pause
              and self._last_voiced_t is not None
              and self._voiced_ms >= self.thresholds.min_voiced_ms):
            pause_ms = frame.t - self._last_voiced_t
            if pause_ms >= self.thresholds.pause_trigger_ms and self._slope_end() <= 0:
                self._triggered_this_pause = True
                trigger = self._last_voiced_t + self.thresholds.pause_trigger_ms

        self._last_t = frame.t
        self._last_voiced = frame.voiced
        return trigger


def choose_backchannel_form(
    history: Sequence[BackchannelPlan],
    at: float,
    config: ListeningConfig = DEFAULT_LISTENING,
) -> BackchannelPlan:
    """Pick the next acknowledgement: token differing from the previous one,
    paired with the next nod pattern in the cycle."""
    repertoire = config.repertoire
    if not history:
        token = repertoire[0]
    else:
        previous = history[-1].token
        try:
            idx = repertoire.index(previous)
        except ValueError:
            idx = -1
        token = repertoire[(idx + 1) % len(repertoire)]
    nod = config.nod_patterns[len(history) % len(config.nod_patterns)] if config.nod_patterns else None
    return BackchannelPlan(token=token, asset_id=config.asset_table[token], at=at, nod=nod)


def decide_turn(frames: Iterable[ProsodyFrame], fluency: FluencyProfile) -> TurnDecision:
    """Yield the floor to the system once trailing silence reaches the
    fluency-scaled timeout; hold otherwise."""
    first_t: float | None = None
    last_t: float | None = None
    last_voiced_t: float | None = None
    for frame in frames:
        if first_t is None:
            first_t = frame.t
        last_t = frame.t
        if frame.voiced:
            last_voiced_t = frame.t
    if last_t is None:
        return TurnDecision(TurnKind.HOLD, 0.0)
    anchor = last_voiced_t if last_voiced_t is not None else first_t
    silence_ms = last_t - (anchor if anchor is not None else last_t)
    if silence_ms >= fluency.turn_timeout_s * 1000.0:
        return TurnDecision(TurnKind.YIELD_TO_SYSTEM, silence_ms)
    return TurnDecision(TurnKind.HOLD, silence_ms)
