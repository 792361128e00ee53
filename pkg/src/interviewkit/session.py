"""Session runner: one live interview from opening question to closing bow.

Couples the dialogue engine, the listening module, and the transcript store
under a logical clock measured in milliseconds since session start. System
speech occupies a window derived from its word count and the current speech
rate factor; user turns start after a fixed gap and last their reported
duration. Everything downstream of the inputs is deterministic, which is
what makes byte-level replay possible.

Ordering contract per user turn: backchannels triggered while the user is
speaking are appended first, then the user utterance, then the engine's
response block (repair note, state change, utterance, gesture).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timedelta
from typing import TYPE_CHECKING, Sequence

from .dialogue import (
    ActionKind,
    AsrStatus,
    DialogueState,
    EngineConfig,
    FillerPolicy,
    InterviewScript,
    Phase,
    SystemAction,
    UserUtterance,
    advance,
    initial_action,
    initial_state,
)
from .dialogue.engine import ACTION_REPAIR_KIND
from .errors import SessionClosedError, StreamOrderError
from .listening import (
    BackchannelPlan,
    BackchannelPredictor,
    HeuristicBackchannelPredictor,
    ListeningConfig,
    ProsodyFrame,
    choose_backchannel_form,
)
from .transcript import (
    AgentProfile,
    EventKind,
    SessionTranscript,
    TranscriptEvent,
    TranscriptStore,
    TranscriptWriter,
)

if TYPE_CHECKING:  # pragma: no cover
    from .pipeline.client import LanguageModelClient


@dataclass(frozen=True)
class SessionConfig:
    engine: EngineConfig = field(default_factory=EngineConfig)
    listening: ListeningConfig = field(default_factory=ListeningConfig)
    speaking_wpm: float = 150.0   # base system speaking rate at factor 1.0
    turn_gap_ms: float = 250.0    # silence between system speech end and user turn start
    filler_budget_ms: float = 1500.0


DEFAULT_SESSION = SessionConfig()


@dataclass(frozen=True)
class ServerEvent:
    """One server-to-client wire event.

    ``seq`` is the contiguous per-session counter over server events (the
    stream the client gap-checks); ``transcript_seq`` is the sequence number
    the same event carries in the stored transcript, where user turns also
    occupy sequence numbers.
    """

    seq: int
    transcript_seq: int
    type: str
    t: float
    payload: dict

    def to_wire(self) -> dict:
        doc = {"type": self.type, "seq": self.seq,
               "transcript_seq": self.transcript_seq, "t": self.t}
        doc.update(self.payload)
        return doc


def _iso_plus_ms(started_at: str, ms: float) -> str:
    try:
        start = datetime.fromisoformat(started_at.replace("Z", "+00:00"))
    except ValueError:
        return started_at
    end = start + timedelta(milliseconds=ms)
    return end.isoformat().replace("+00:00", "Z")


def _gesture_payload(action: SystemAction) -> dict | None:
    if action.gesture is None:
        return None
    payload: dict = {"tag": action.gesture.name}
    if action.gesture.nod is not None:
        payload["nod"] = {"frequency": action.gesture.nod.frequency,
                          "speed": action.gesture.nod.speed.value}
    return payload


class InterviewSession:
    """Owns one DialogueState and the session's ordered event log."""

    def __init__(
        self,
        script: InterviewScript,
        session_id: str,
        agent_profile: AgentProfile = AgentProfile.ANDROID_LIKE,
        started_at: str = "1970-01-01T00:00:00Z",
        store: TranscriptStore | None = None,
        config: SessionConfig = DEFAULT_SESSION,
        llm: "LanguageModelClient | None" = None,
        predictor: BackchannelPredictor | None = None,
        start_topic: str | None = None,
    ):
        self.script = script
        self.session_id = session_id
        self.config = config
        self.llm = llm
        self.state: DialogueState = initial_state(script, start_topic, config.engine)
        self.predictor = predictor or HeuristicBackchannelPredictor(config.listening.thresholds)
        self._fillers = FillerPolicy(script, budget_ms=config.filler_budget_ms)
        self._writer: TranscriptWriter | None = None
        if store is not None:
            self._writer = store.open_writer(session_id, script.script_id,
                                             agent_profile, started_at)
            self.transcript = self._writer.transcript
        else:
            self.transcript = SessionTranscript(
                session_id=session_id, script_id=script.script_id,
                agent_profile=agent_profile, started_at=started_at)
        self.clock_ms = 0.0
        self.server_events: list[ServerEvent] = []
        self._wire_seq = 0
        self._speech_windows: list[tuple[float, float]] = []
        self._bc_history: list[BackchannelPlan] = []
        self._timeouts_for_question = 0
        self._started = False
        self._finalized = False

    # ------------------------------------------------------------------
    # event plumbing

    @property
    def done(self) -> bool:
        return self.state.phase is Phase.DONE

    def _append_transcript(self, kind: EventKind, t: float, payload: dict) -> int:
        event = TranscriptEvent(seq=self.transcript.last_seq + 1, kind=kind,
                                t=t, payload=payload)
        if self._writer is not None:
            self._writer.append(event)
        else:
            self.transcript.append(event)
        return event.seq

    def _emit(self, kind: EventKind, wire_type: str, t: float, payload: dict) -> ServerEvent:
        transcript_seq = self._append_transcript(kind, t, payload)
        self._wire_seq += 1
        event = ServerEvent(seq=self._wire_seq, transcript_seq=transcript_seq,
                            type=wire_type, t=t, payload=payload)
        self.server_events.append(event)
        return event

    def _speech_duration_ms(self, action: SystemAction) -> float:
        from .text import word_count

        words = max(word_count(action.text), 1)
        wpm = self.config.speaking_wpm * max(action.speech_rate_factor, 0.1)
        return words / wpm * 60000.0

    def _in_system_speech(self, t: float) -> bool:
        return any(start <= t < end for start, end in self._speech_windows)

    def _emit_action(self, action: SystemAction, at: float) -> list[ServerEvent]:
        events: list[ServerEvent] = []
        if action.kind is ActionKind.BACKCHANNEL:
            token = action.text
            payload = {"token": token,
                       "asset_id": self.config.listening.asset_table.get(token, f"{token}.wav"),
                       "nod": None}
            events.append(self._emit(EventKind.BACKCHANNEL, "backchannel", at, payload))
            self.predictor.reset()
            return events
        payload = {
            "kind": action.kind.value,
            "text": action.text,
            "rate_factor": action.speech_rate_factor,
            "topic_id": action.topic_id,
        }
        events.append(self._emit(EventKind.SYSTEM_UTTERANCE, "system_utterance", at, payload))
        gesture = _gesture_payload(action)
        if gesture is not None:
            events.append(self._emit(EventKind.GESTURE, "gesture", at, gesture))
        start, end = at, at + self._speech_duration_ms(action)
        self._speech_windows.append((start, end))
        self.clock_ms = end
        self.predictor.reset()
        return events

    # ------------------------------------------------------------------
    # lifecycle

    def start(self) -> list[ServerEvent]:
        if self._started:
            return []
        self._started = True
        action = initial_action(self.script, self.state)
        return self._emit_action(action, at=self.clock_ms)

    def _backchannel_events(self, turn_start: float, turn_end: float,
                            frames: Sequence[ProsodyFrame] | None,
                            scripted: Sequence[tuple[float, dict]] | None) -> list[ServerEvent]:
        events: list[ServerEvent] = []
        if scripted:
            # replay path: re-emit recorded backchannels verbatim
            for t, payload in scripted:
                events.append(self._emit(EventKind.BACKCHANNEL, "backchannel", t, dict(payload)))
            return events
        if not frames:
            return events
        for frame in frames:
            if turn_start + frame.t > turn_end:
                break  # frames past the turn's end belong to no one
            absolute = ProsodyFrame(t=turn_start + frame.t, voiced=frame.voiced,
                                    f0=frame.f0, power=frame.power)
            try:
                trigger = self.predictor.feed(absolute)
            except StreamOrderError:
                continue
            if trigger is None or trigger >= turn_end or self._in_system_speech(trigger):
                continue
            plan = choose_backchannel_form(self._bc_history, trigger, self.config.listening)
            self._bc_history.append(plan)
            payload = {"token": plan.token, "asset_id": plan.asset_id,
                       "nod": None if plan.nod is None else
                       {"frequency": plan.nod.frequency, "speed": plan.nod.speed.value}}
            events.append(self._emit(EventKind.BACKCHANNEL, "backchannel", plan.at, payload))
        return events

    def on_user_turn(
        self,
        utterance: UserUtterance,
        frames: Sequence[ProsodyFrame] | None = None,
        scripted_backchannels: Sequence[tuple[float, dict]] | None = None,
        processing_delay_ms: float = 0.0,
    ) -> list[ServerEvent]:
        """Process one participant turn and emit the system's response block.

        ``frames`` are turn-relative prosody samples used for backchannel
        prediction; ``scripted_backchannels`` (replay) bypass prediction and
        re-emit recorded plans verbatim.
        """
        if self.done or self._finalized:
            raise SessionClosedError(f"session {self.session_id} is closed")
        if not self._started:
            self.start()

        turn_start = self.clock_ms + self.config.turn_gap_ms
        turn_end = turn_start + max(utterance.duration_s, 0.0) * 1000.0
        events = self._backchannel_events(turn_start, turn_end, frames, scripted_backchannels)
        self.clock_ms = turn_end
        self._append_transcript(EventKind.USER_UTTERANCE, turn_end, {
            "text": utterance.text,
            "word_count": utterance.word_count,
            "duration_s": utterance.duration_s,
            "asr_status": utterance.asr_status.value,
            "processing_delay_ms": processing_delay_ms,
            "prosody": {"f0_mean": utterance.prosody.f0_mean,
                        "f0_slope_end": utterance.prosody.f0_slope_end,
                        "power_mean": utterance.prosody.power_mean},
        })
        if utterance.asr_status is AsrStatus.OK and utterance.text:
            self._timeouts_for_question = 0

        action_at = turn_end
        if processing_delay_ms > 0:
            filler = self._fillers.interim_filler(processing_delay_ms)
            if filler is not None:
                self._append_transcript(EventKind.REPAIR, turn_end + self.config.filler_budget_ms,
                                        {"repair_kind": "interim_filler"})
                filler_action = SystemAction(
                    kind=ActionKind.FILLER, text=filler,
                    speech_rate_factor=self.state.fluency.speech_rate_factor,
                    topic_id=self.state.current_topic)
                events.extend(self._emit_action(filler_action, turn_end + self.config.filler_budget_ms))
            action_at = max(turn_end + processing_delay_ms, self.clock_ms)

        before_topic, before_phase = self.state.current_topic, self.state.phase
        self.state, action = advance(self.state, self.script, utterance,
                                     self.config.engine, self.llm)

        repair_kind = ACTION_REPAIR_KIND.get(action.kind)
        if repair_kind is not None:
            self._append_transcript(EventKind.REPAIR, action_at,
                                    {"repair_kind": repair_kind.value})

        if self.state.current_topic != before_topic and self.state.phase is Phase.AWAITING_ANSWER:
            events.append(self._emit(EventKind.STATE_CHANGE, "state_change", action_at,
                                     {"phase": self.state.phase.value,
                                      "topic": self.state.current_topic}))

        events.extend(self._emit_action(action, action_at))
        if action.kind in (ActionKind.ASK, ActionKind.CLOSE):
            self._timeouts_for_question = 0

        if self.state.phase is Phase.CLOSING and before_phase is Phase.AWAITING_ANSWER:
            # closing delivered; the dialogue is complete
            self.state.phase = Phase.DONE
            pointer = f"/sessions/{self.session_id}/transcript"
            events.append(self._emit(EventKind.STATE_CHANGE, "interview_complete",
                                     self.clock_ms,
                                     {"phase": Phase.DONE.value, "summary": pointer}))
        return events

    def on_timeout(self) -> list[ServerEvent]:
        """Inject a synthetic turn after the participant stayed quiet too long.

        The first timeout for a question is treated as voice that produced no
        text (a minimal backchannel nudges the participant on); from the
        second on it is full silence, which routes to an encouragement.
        """
        timeout_s = self.state.fluency.turn_timeout_s
        self._timeouts_for_question += 1
        if self._timeouts_for_question <= 1:
            utterance = UserUtterance("", duration_s=timeout_s,
                                      asr_status=AsrStatus.EMPTY_WITH_VOICE)
        else:
            utterance = UserUtterance("", duration_s=0.0, asr_status=AsrStatus.SILENCE)
        return self.on_user_turn(utterance)

    def feed_frame(self, frame: ProsodyFrame) -> list[ServerEvent]:
        """Live streaming path: one absolute-time prosody frame."""
        if self.done or self._finalized:
            raise SessionClosedError(f"session {self.session_id} is closed")
        try:
            trigger = self.predictor.feed(frame)
        except StreamOrderError:
            return []
        if trigger is None or self._in_system_speech(trigger):
            return []
        plan = choose_backchannel_form(self._bc_history, trigger, self.config.listening)
        self._bc_history.append(plan)
        payload = {"token": plan.token, "asset_id": plan.asset_id,
                   "nod": None if plan.nod is None else
                   {"frequency": plan.nod.frequency, "speed": plan.nod.speed.value}}
        return [self._emit(EventKind.BACKCHANNEL, "backchannel", plan.at, payload)]

    def finalize(self, status: str | None = None) -> SessionTranscript:
        if self._finalized:
            return self.transcript
        self._finalized = True
        final_status = status or ("completed" if self.done else "incomplete")
        ended_at = _iso_plus_ms(self.transcript.started_at, self.clock_ms)
        if self._writer is not None:
            self._writer.finalize(ended_at=ended_at, status=final_status)
        else:
            self.transcript.ended_at = ended_at
            self.transcript.status = final_status
        return self.transcript


# ----------------------------------------------------------------------
# trace-driven runs and replay


@dataclass(frozen=True)
class TraceTurn:
    """One simulated participant turn from a trace file."""

    text: str
    duration_s: float
    asr_status: AsrStatus = AsrStatus.OK
    frames: tuple[ProsodyFrame, ...] = ()
    processing_delay_ms: float = 0.0

    def to_utterance(self) -> UserUtterance:
        return UserUtterance(self.text, duration_s=self.duration_s,
                             asr_status=self.asr_status)


def run_trace(
    script: InterviewScript,
    turns: Sequence[TraceTurn],
    session_id: str,
    agent_profile: AgentProfile = AgentProfile.ANDROID_LIKE,
    started_at: str = "1970-01-01T00:00:00Z",
    store: TranscriptStore | None = None,
    config: SessionConfig = DEFAULT_SESSION,
    llm: "LanguageModelClient | None" = None,
    start_topic: str | None = None,
) -> tuple[SessionTranscript, list[ServerEvent]]:
    """Drive a full session from a list of simulated turns."""
    session = InterviewSession(script, session_id, agent_profile, started_at,
                               store=store, config=config, llm=llm,
                               start_topic=start_topic)
    session.start()
    for turn in turns:
        if session.done:
            break
        session.on_user_turn(turn.to_utterance(), frames=turn.frames or None,
                             processing_delay_ms=turn.processing_delay_ms)
    transcript = session.finalize()
    return transcript, session.server_events


def replay_transcript(
    original: SessionTranscript,
    script: InterviewScript,
    config: SessionConfig = DEFAULT_SESSION,
    llm: "LanguageModelClient | None" = None,
    start_topic: str | None = None,
) -> SessionTranscript:
    """Re-run a recorded session's user events through the engine.

    Backchannels are listening-module output, so they are re-emitted verbatim
    at their recorded times; every engine-derived event is regenerated. With
    the template-mode engine the result is byte-identical to the original.
    """
    session = InterviewSession(script, original.session_id, original.agent_profile,
                               original.started_at, config=config, llm=llm,
                               start_topic=start_topic)
    session.start()
    pending_backchannels: list[tuple[float, dict]] = []
    for event in original.events:
        if event.kind is EventKind.BACKCHANNEL:
            # only the ones that overlap the upcoming user turn; repair
            # backchannels are regenerated by the engine
            if not _is_repair_backchannel(original, event):
                pending_backchannels.append((event.t, event.payload))
        elif event.kind is EventKind.USER_UTTERANCE:
            from .dialogue import ProsodySummary

            prosody_doc = event.payload.get("prosody", {})
            utterance = UserUtterance(
                text=str(event.payload.get("text", "")),
                duration_s=float(event.payload.get("duration_s", 0.0)),
                asr_status=AsrStatus(event.payload.get("asr_status", "ok")),
                prosody=ProsodySummary(
                    f0_mean=float(prosody_doc.get("f0_mean", 0.0)),
                    f0_slope_end=float(prosody_doc.get("f0_slope_end", 0.0)),
                    power_mean=float(prosody_doc.get("power_mean", 0.0))),
            )
            delay = float(event.payload.get("processing_delay_ms", 0.0))
            session.on_user_turn(utterance, scripted_backchannels=pending_backchannels or None,
                                 processing_delay_ms=delay)
            pending_backchannels = []
    return session.finalize(status=original.status)


def _is_repair_backchannel(transcript: SessionTranscript, event: TranscriptEvent) -> bool:
    """True when the backchannel directly follows a minimal-backchannel repair note."""
    idx = event.seq - 1  # events are 1-based and contiguous
    if idx <= 0:
        return False
    previous = transcript.events[idx - 1]
    return (previous.kind is EventKind.REPAIR
            and previous.payload.get("repair_kind") == "minimal_backchannel")
