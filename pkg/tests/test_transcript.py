from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from interviewkit.errors import IntegrityError, NotFoundError, OrderingError
from interviewkit.transcript import (
    AgentProfile,
    EventKind,
    SessionTranscript,
    TranscriptEvent,
    TranscriptStore,
    to_json_bytes,
)


def ev(seq: int, kind: EventKind = EventKind.SYSTEM_UTTERANCE, t: float | None = None,
       **payload) -> TranscriptEvent:
    return TranscriptEvent(seq=seq, kind=kind, t=t if t is not None else seq * 100.0,
                           payload=payload or {"text": f"event {seq}"})


class TestInMemoryAppend:
    def test_first_append(self):
        transcript = SessionTranscript("s1", "default", AgentProfile.ANDROID_LIKE, "2026-01-01T00:00:00Z")
        transcript.append(ev(1))
        assert len(transcript.events) == 1

    def test_gap_rejected(self):
        transcript = SessionTranscript("s1", "default", AgentProfile.ANDROID_LIKE, "2026-01-01T00:00:00Z")
        transcript.append(ev(1))
        with pytest.raises(OrderingError):
            transcript.append(ev(3))

    def test_duplicate_rejected(self):
        transcript = SessionTranscript("s1", "default", AgentProfile.ANDROID_LIKE, "2026-01-01T00:00:00Z")
        transcript.append(ev(1))
        with pytest.raises(OrderingError):
            transcript.append(ev(1))


class TestStoreRoundTrip:
    def test_wal_appends_then_reload(self, tmp_path):
        store = TranscriptStore(tmp_path)
        writer = store.open_writer("s1", "default", started_at="2026-01-01T00:00:00Z")
        for i in range(1, 501):
            writer.append(ev(i))
        loaded = store.load("s1")
        assert loaded.events == writer.transcript.events
        assert loaded.session_id == "s1"

    def test_finalize_then_reload_byte_faithful(self, tmp_path):
        store = TranscriptStore(tmp_path)
        writer = store.open_writer("s2", "default", started_at="2026-01-01T00:00:00Z")
        writer.append(ev(1, EventKind.SYSTEM_UTTERANCE, text="Hello?"))
        writer.append(ev(2, EventKind.USER_UTTERANCE, text="Hi."))
        path = writer.finalize(ended_at="2026-01-01T00:01:00Z")
        loaded = store.load("s2")
        assert to_json_bytes(loaded) == path.read_bytes()
        assert loaded == writer.transcript

    def test_unknown_session_not_found(self, tmp_path):
        with pytest.raises(NotFoundError):
            TranscriptStore(tmp_path).load("ghost")

    def test_truncated_json_is_integrity_error(self, tmp_path):
        store = TranscriptStore(tmp_path)
        writer = store.open_writer("s3", "default")
        writer.append(ev(1))
        path = writer.finalize(ended_at="2026-01-01T00:01:00Z")
        raw = path.read_bytes()
        path.write_bytes(raw[: len(raw) // 2])
        with pytest.raises(IntegrityError):
            store.load("s3")

    def test_corrupt_wal_reports_offset(self, tmp_path):
        store = TranscriptStore(tmp_path)
        writer = store.open_writer("s4", "default")
        writer.append(ev(1))
        wal = store.wal_path("s4")
        with open(wal, "a", encoding="utf-8") as fh:
            fh.write('{"seq": 2, "kind": "gesture", broken\n')
        with pytest.raises(IntegrityError) as excinfo:
            store.load("s4")
        assert excinfo.value.offset is not None
        assert excinfo.value.offset > 0

    def test_list_sessions_filters(self, tmp_path):
        store = TranscriptStore(tmp_path)
        for sid, script, date in [("a", "default", "2026-01-01T09:00:00Z"),
                                  ("b", "default", "2026-01-02T09:00:00Z"),
                                  ("c", "other", "2026-01-01T10:00:00Z")]:
            w = store.open_writer(sid, script, started_at=date)
            w.append(ev(1))
            w.finalize(ended_at=date)
        assert store.list_sessions() == ["a", "b", "c"]
        assert store.list_sessions(script_id="default") == ["a", "b"]
        assert store.list_sessions(date="2026-01-01") == ["a", "c"]
        assert store.list_sessions(script_id="default", date="2026-01-01") == ["a"]


events_strategy = st.lists(
    st.tuples(st.sampled_from(list(EventKind)),
              st.floats(min_value=0, max_value=600000),
              st.text(max_size=40)),
    min_size=0, max_size=60)


@given(events_strategy)
def test_round_trip_identity_for_random_event_sequences(tmp_path_factory, raw_events):
    """Store round-trip preserves any valid event sequence exactly."""
    root = tmp_path_factory.mktemp("store")
    store = TranscriptStore(root)
    writer = store.open_writer("rt", "default", started_at="2026-01-01T00:00:00Z")
    t = 0.0
    for i, (kind, dt, text) in enumerate(raw_events, start=1):
        t += dt / 1000.0
        writer.append(TranscriptEvent(seq=i, kind=kind, t=t, payload={"text": text}))
    writer.finalize(ended_at="2026-01-01T00:05:00Z")
    first = store.load("rt")
    assert first == writer.transcript
    # loading is stable: serialize -> parse -> identical object and bytes
    again = SessionTranscript.from_dict(json.loads(to_json_bytes(first)))
    assert again == first
    assert to_json_bytes(again) == to_json_bytes(first)
