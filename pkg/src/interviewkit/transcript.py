"""Session transcript model and durable event-log store.

One session is one JSON document under the store directory. While a session
is live its events are appended line-by-line to a write-ahead file
(``<session_id>.wal``); finalizing rewrites the canonical document
(``<session_id>.json``) and drops the WAL, so a crash never loses appended
events. Serialization is canonical (sorted keys, two-space indent, trailing
newline) which makes byte-level replay comparisons meaningful.

Timestamps on events are milliseconds since session start, not wall clock,
so replaying a session reproduces the stored file exactly.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import IntegrityError, NotFoundError, OrderingError

SCHEMA_VERSION = 1


class EventKind(str, Enum):
    SYSTEM_UTTERANCE = "system_utterance"
    USER_UTTERANCE = "user_utterance"
    BACKCHANNEL = "backchannel"
    GESTURE = "gesture"
    REPAIR = "repair"
    STATE_CHANGE = "state_change"


class AgentProfile(str, Enum):
    ANDROID_LIKE = "android_like"
    HUMANOID_LIKE = "humanoid_like"


@dataclass(frozen=True)
class TranscriptEvent:
    seq: int
    kind: EventKind
    t: float  # ms since session start
    payload: dict

    def to_dict(self) -> dict:
        return {"seq": self.seq, "kind": self.kind.value, "t": self.t,
                "payload": self.payload}

    @classmethod
    def from_dict(cls, doc: dict) -> "TranscriptEvent":
        return cls(seq=int(doc["seq"]), kind=EventKind(doc["kind"]),
                   t=float(doc["t"]), payload=dict(doc["payload"]))


@dataclass
class SessionTranscript:
    session_id: str
    script_id: str
    agent_profile: AgentProfile
    started_at: str  # ISO 8601
    ended_at: str | None = None
    status: str = "active"  # active | completed | incomplete
    events: list[TranscriptEvent] = field(default_factory=list)

    @property
    def last_seq(self) -> int:
        return self.events[-1].seq if self.events else 0

    def append(self, event: TranscriptEvent) -> None:
        """In-memory append; seq must be exactly last + 1."""
        expected = self.last_seq + 1
        if event.seq != expected:
            raise OrderingError(
                f"event seq {event.seq} after seq {self.last_seq} (expected {expected})")
        self.events.append(event)

    def server_events(self) -> list[TranscriptEvent]:
        """Events that were (or would be) delivered over the wire."""
        client_only = {EventKind.USER_UTTERANCE, EventKind.REPAIR}
        return [e for e in self.events if e.kind not in client_only]

    def to_dict(self) -> dict:
        return {
            "v": SCHEMA_VERSION,
            "session_id": self.session_id,
            "script_id": self.script_id,
            "agent_profile": self.agent_profile.value,
            "started_at": self.started_at,
            "ended_at": self.ended_at,
            "status": self.status,
            "events": [e.to_dict() for e in self.events],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SessionTranscript":
        transcript = cls(
            session_id=str(doc["session_id"]),
            script_id=str(doc["script_id"]),
            agent_profile=AgentProfile(doc["agent_profile"]),
            started_at=str(doc["started_at"]),
            ended_at=doc.get("ended_at"),
            status=str(doc.get("status", "active")),
        )
        for raw in doc.get("events", []):
            transcript.append(TranscriptEvent.from_dict(raw))
        return transcript


def to_json_bytes(transcript: SessionTranscript) -> bytes:
    return (json.dumps(transcript.to_dict(), ensure_ascii=False, indent=2,
                       sort_keys=True) + "\n").encode("utf-8")


class TranscriptWriter:
    """Single writer for one live session; appends go straight to the WAL."""

    def __init__(self, store: "TranscriptStore", transcript: SessionTranscript):
        self._store = store
        self.transcript = transcript
        self._wal_path = store.wal_path(transcript.session_id)
        header = {
            "v": SCHEMA_VERSION,
            "session_id": transcript.session_id,
            "script_id": transcript.script_id,
            "agent_profile": transcript.agent_profile.value,
            "started_at": transcript.started_at,
        }
        self._write_line(header, mode="w")

    def _write_line(self, doc: dict, mode: str = "a") -> None:
        line = json.dumps(doc, ensure_ascii=False, sort_keys=True)
        with open(self._wal_path, mode, encoding="utf-8") as fh:
            fh.write(line + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def append(self, event: TranscriptEvent) -> None:
        self.transcript.append(event)  # validates ordering first
        self._write_line(event.to_dict())

    def finalize(self, ended_at: str, status: str = "completed") -> Path:
        self.transcript.ended_at = ended_at
        self.transcript.status = status
        path = self._store.json_path(self.transcript.session_id)
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(to_json_bytes(self.transcript))
        os.replace(tmp, path)
        self._wal_path.unlink(missing_ok=True)
        return path


class TranscriptStore:
    """Filesystem store: ``<root>/<session_id>.json`` (finalized) or ``.wal`` (live)."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def json_path(self, session_id: str) -> Path:
        return self.root / f"{session_id}.json"

    def wal_path(self, session_id: str) -> Path:
        return self.root / f"{session_id}.wal"

    def open_writer(self, session_id: str, script_id: str,
                    agent_profile: AgentProfile = AgentProfile.ANDROID_LIKE,
                    started_at: str = "1970-01-01T00:00:00Z") -> TranscriptWriter:
        transcript = SessionTranscript(
            session_id=session_id, script_id=script_id,
            agent_profile=agent_profile, started_at=started_at)
        return TranscriptWriter(self, transcript)

    def save(self, transcript: SessionTranscript) -> Path:
        path = self.json_path(transcript.session_id)
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(to_json_bytes(transcript))
        os.replace(tmp, path)
        return path

    def is_finalized(self, session_id: str) -> bool:
        return self.json_path(session_id).is_file()

    def exists(self, session_id: str) -> bool:
        return self.is_finalized(session_id) or self.wal_path(session_id).is_file()

    def load(self, session_id: str) -> SessionTranscript:
        json_path = self.json_path(session_id)
        if json_path.is_file():
            raw = json_path.read_bytes()
            try:
                doc = json.loads(raw.decode("utf-8"))
            except (json.JSONDecodeError, UnicodeDecodeError) as exc:
                offset = getattr(exc, "pos", None)
                raise IntegrityError(
                    f"session file {json_path} is corrupt at offset {offset}: {exc}",
                    offset=offset) from exc
            try:
                return SessionTranscript.from_dict(doc)
            except (KeyError, ValueError, OrderingError) as exc:
                raise IntegrityError(f"session file {json_path} is inconsistent: {exc}") from exc
        wal_path = self.wal_path(session_id)
        if wal_path.is_file():
            return self._load_wal(wal_path)
        raise NotFoundError(f"no session {session_id!r} in {self.root}")

    def _load_wal(self, path: Path) -> SessionTranscript:
        offset = 0
        transcript: SessionTranscript | None = None
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                stripped = line.strip()
                if stripped:
                    try:
                        doc = json.loads(stripped)
                    except json.JSONDecodeError as exc:
                        raise IntegrityError(
                            f"WAL {path} is corrupt at offset {offset + exc.pos}",
                            offset=offset + exc.pos) from exc
                    if transcript is None:
                        if "session_id" not in doc:
                            raise IntegrityError(f"WAL {path} missing header", offset=offset)
                        transcript = SessionTranscript(
                            session_id=str(doc["session_id"]),
                            script_id=str(doc["script_id"]),
                            agent_profile=AgentProfile(doc["agent_profile"]),
                            started_at=str(doc["started_at"]),
                        )
                    else:
                        try:
                            transcript.append(TranscriptEvent.from_dict(doc))
                        except (KeyError, ValueError, OrderingError) as exc:
                            raise IntegrityError(
                                f"WAL {path} inconsistent at offset {offset}: {exc}",
                                offset=offset) from exc
                offset += len(line.encode("utf-8"))
        if transcript is None:
            raise IntegrityError(f"WAL {path} is empty", offset=0)
        return transcript

    def list_sessions(self, script_id: str | None = None,
                      date: str | None = None) -> list[str]:
        """Session ids, sorted; optionally filtered by script and start date prefix."""
        ids = {p.stem for p in self.root.glob("*.json")}
        ids |= {p.stem for p in self.root.glob("*.wal")}
        if script_id is None and date is None:
            return sorted(ids)
        out = []
        for session_id in sorted(ids):
            transcript = self.load(session_id)
            if script_id is not None and transcript.script_id != script_id:
                continue
            if date is not None and not transcript.started_at.startswith(date):
                continue
            out.append(session_id)
        return out
