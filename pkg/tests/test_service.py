from __future__ import annotations

import json
import time

import pytest
from fastapi.testclient import TestClient

from interviewkit.dialogue import EngineConfig, FluencyConfig
from interviewkit.resources import data_path
from interviewkit.service import ServiceConfig, create_app
from interviewkit.session import SessionConfig

ANSWERS = [
    "I value accuracy because wrong answers cost trust.",
    "Yeah, not only human-like but also considering the user's preferences.",
    "Yes, because small flaws can make it relatable.",
    "Clear rules, because misuse is a real risk.",
    "Yeah, it was a really interesting experience because this is my first time.",
]


@pytest.fixture()
def client(tmp_path):
    config = ServiceConfig(data_dir=tmp_path, heartbeat_s=30.0,
                           idle_expiry_s=60.0, timeout_poll_s=0.05)
    app = create_app(config)
    with TestClient(app) as test_client:
        yield test_client


def complete_interview(client, session_id: str) -> list[dict]:
    """Drive a full interview over the stream; returns all server events seen."""
    seen: list[dict] = []
    with client.websocket_connect(f"/sessions/{session_id}/stream") as ws:
        answer_iter = iter(ANSWERS)
        while True:
            event = ws.receive_json()
            if event["type"] == "heartbeat":
                continue
            seen.append(event)
            if event["type"] == "interview_complete":
                break
            if event["type"] == "system_utterance" and event["kind"] in ("ask", "repeat", "encourage"):
                ws.send_text(json.dumps({"type": "user_text", "text": next(answer_iter),
                                         "duration_s": 4.0}))
    return seen


class TestHttp:
    def test_healthz(self, client):
        assert client.get("/healthz").status_code == 200

    def test_create_session_queues_first_question(self, client):
        response = client.post("/sessions", json={"script_id": "default"})
        assert response.status_code == 201
        body = response.json()
        assert body["session_id"]
        transcript = client.get(f"/sessions/{body['session_id']}/transcript").json()
        first = transcript["events"][0]
        assert first["kind"] == "system_utterance"
        assert first["payload"]["kind"] == "ask"

    def test_unknown_script_404(self, client):
        assert client.post("/sessions", json={"script_id": "nope"}).status_code == 404

    def test_two_creates_distinct_ids(self, client):
        a = client.post("/sessions", json={}).json()["session_id"]
        b = client.post("/sessions", json={}).json()["session_id"]
        assert a != b

    def test_unknown_transcript_404(self, client):
        assert client.get("/sessions/ghost/transcript").status_code == 404

    def test_pipeline_on_active_session_409(self, client):
        sid = client.post("/sessions", json={}).json()["session_id"]
        response = client.post("/pipeline/runs", json={"session_ids": [sid]})
        assert response.status_code == 409

    def test_unknown_run_404(self, client):
        assert client.get("/pipeline/runs/ghost").status_code == 404


class TestInterviewFlow:
    def test_full_interview_closes_positively(self, client):
        sid = client.post("/sessions", json={}).json()["session_id"]
        events = complete_interview(client, sid)
        closes = [e for e in events if e["type"] == "system_utterance" and e["kind"] == "close"]
        assert len(closes) == 1
        assert closes[0]["text"].startswith("I'm glad that you enjoyed")
        assert events[-1]["type"] == "interview_complete"

    def test_wire_seq_gapless(self, client):
        sid = client.post("/sessions", json={}).json()["session_id"]
        events = complete_interview(client, sid)
        seqs = [e["seq"] for e in events]
        assert seqs == list(range(1, len(seqs) + 1))

    def test_client_stream_equals_stored_server_events(self, client):
        sid = client.post("/sessions", json={}).json()["session_id"]
        events = complete_interview(client, sid)
        stored = client.get(f"/sessions/{sid}/transcript").json()
        server_kinds = {"system_utterance", "backchannel", "gesture", "state_change"}
        stored_server = [e for e in stored["events"] if e["kind"] in server_kinds]
        assert len(stored_server) == len(events)
        for wire, kept in zip(events, stored_server):
            assert wire["transcript_seq"] == kept["seq"]
            wire_type = "state_change" if wire["type"] == "interview_complete" else wire["type"]
            assert wire_type == kept["kind"]
        assert stored["status"] == "completed"

    def test_transcript_is_schema_valid(self, client):
        jsonschema = pytest.importorskip("jsonschema")
        sid = client.post("/sessions", json={}).json()["session_id"]
        complete_interview(client, sid)
        stored = client.get(f"/sessions/{sid}/transcript").json()
        schema = json.loads(data_path("transcript.schema.json").read_text())
        jsonschema.validate(stored, schema)

    def test_user_text_after_complete_is_session_closed(self, client):
        sid = client.post("/sessions", json={}).json()["session_id"]
        with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
            answer_iter = iter(ANSWERS)
            while True:
                event = ws.receive_json()
                if event["type"] == "interview_complete":
                    break
                if event["type"] == "system_utterance" and event["kind"] in ("ask", "repeat"):
                    ws.send_text(json.dumps({"type": "user_text", "text": next(answer_iter),
                                             "duration_s": 4.0}))
            ws.send_text(json.dumps({"type": "user_text", "text": "hello?", "duration_s": 1.0}))
            error = ws.receive_json()
            assert error == {"type": "error", "error": "session-closed"}

    def test_second_connection_rejected(self, client):
        sid = client.post("/sessions", json={}).json()["session_id"]
        with client.websocket_connect(f"/sessions/{sid}/stream") as first:
            first.receive_json()
            with client.websocket_connect(f"/sessions/{sid}/stream") as second:
                error = second.receive_json()
                assert error["error"] == "already-connected"

    def test_reconnect_resumes_after_seq(self, client):
        sid = client.post("/sessions", json={}).json()["session_id"]
        with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
            first = ws.receive_json()
            second = ws.receive_json()
            assert [first["seq"], second["seq"]] == [1, 2]
            ws.send_text(json.dumps({"type": "user_text",
                                     "text": ANSWERS[0], "duration_s": 4.0}))
            third = ws.receive_json()
        # drop and reconnect from the middle: no gaps, no duplicates
        with client.websocket_connect(f"/sessions/{sid}/stream?after_seq={second['seq']}") as ws:
            replayed = ws.receive_json()
            assert replayed["seq"] == third["seq"]

    def test_prosody_stream_triggers_backchannel_outside_system_speech(self, client):
        sid = client.post("/sessions", json={}).json()["session_id"]
        with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
            opening = ws.receive_json()
            ws.receive_json()  # gesture
            # opening speech window ends at its estimated duration; stream
            # speech safely after it
            base = opening["t"] + 60000.0
            t = base
            while t <= base + 2000.0:
                ws.send_text(json.dumps({"type": "prosody_frame", "t": t, "voiced": True,
                                         "f0": 220.0 - (t - base) / 100.0, "power": 1.0}))
                t += 100.0
            for _ in range(8):
                ws.send_text(json.dumps({"type": "prosody_frame", "t": t, "voiced": False,
                                         "f0": 0.0, "power": 0.0}))
                t += 100.0
            event = ws.receive_json()
            assert event["type"] == "backchannel"
            assert event["token"] in ("hmm", "erm", "mhmm")


class TestTimeouts:
    @pytest.fixture()
    def snappy_client(self, tmp_path):
        fluency = FluencyConfig(standard_timeout_s=0.3, low_timeout_s=0.6)
        config = ServiceConfig(
            data_dir=tmp_path, heartbeat_s=30.0, idle_expiry_s=30.0, timeout_poll_s=0.02,
            session=SessionConfig(engine=EngineConfig(fluency=fluency)))
        with TestClient(create_app(config)) as test_client:
            yield test_client

    def test_silence_injects_nudge_then_encourage(self, snappy_client):
        sid = snappy_client.post("/sessions", json={}).json()["session_id"]
        with snappy_client.websocket_connect(f"/sessions/{sid}/stream") as ws:
            ws.receive_json()  # question
            ws.receive_json()  # gesture
            nudge = ws.receive_json()  # first timeout: minimal backchannel
            assert nudge["type"] == "backchannel"
            encourage = ws.receive_json()  # second timeout: encourage
            assert encourage["type"] == "system_utterance"
            assert encourage["kind"] == "encourage"


class TestServiceConfig:
    def test_from_file_roundtrip(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"port": 9000, "data_dir": str(tmp_path / "d"),
                                    "llm_mode": "mock", "heartbeat_s": 5}))
        config = ServiceConfig.from_file(path)
        assert config.port == 9000
        assert config.heartbeat_s == 5.0

    def test_bad_port_rejected(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"port": -1}))
        with pytest.raises(ValueError, match="port"):
            ServiceConfig.from_file(path)

    def test_missing_script_dir_rejected(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"script_dir": str(tmp_path / "missing")}))
        with pytest.raises(ValueError, match="script_dir"):
            ServiceConfig.from_file(path)
