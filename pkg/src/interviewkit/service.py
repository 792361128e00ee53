"""Network-facing session manager: live interviews over WebSocket plus
administrative HTTP endpoints.

Wire protocol: one JSON object per WebSocket message. Client to server:
``user_text``, ``prosody_frame``, ``voice_activity``. Server to client:
``system_utterance``, ``backchannel``, ``gesture``, ``state_change``,
``interview_complete`` (all seq-numbered and mirrored into the transcript),
plus unnumbered protocol messages ``heartbeat`` and ``error``.

Each session's events are processed under a per-session lock (single
logical consumer); the connection-level tasks (receiver, turn-timeout
monitor, heartbeat) all funnel through it.
"""

from __future__ import annotations

import asyncio
import json
import logging
import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, Response

from .dialogue import EngineConfig, FluencyConfig, ScriptRegistry, UserUtterance
from .dialogue.questions import FollowupMode
from .errors import InterviewKitError, NotFoundError, ScriptError, SessionClosedError
from .listening import ProsodyFrame
from .pipeline import ClientConfig, HttpLanguageModel, MockLanguageModel, PipelineConfig, run_pipeline
from .session import DEFAULT_SESSION, InterviewSession, ServerEvent, SessionConfig
from .transcript import AgentProfile, TranscriptStore

logger = logging.getLogger(__name__)


@dataclass
class ServiceConfig:
    port: int = 8077
    data_dir: Path = Path("data")
    script_dir: Path | None = None
    llm_mode: str = "mock"  # mock | live
    heartbeat_s: float = 10.0
    idle_expiry_s: float = 900.0  # sessions idle this long finalize as incomplete
    timeout_poll_s: float = 0.1
    session: SessionConfig = field(default_factory=lambda: DEFAULT_SESSION)

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        # environment overrides the file for deploy-time knobs
        for env_key, doc_key in (("INTERVIEWKIT_PORT", "port"),
                                 ("INTERVIEWKIT_DATA_DIR", "data_dir"),
                                 ("INTERVIEWKIT_SCRIPT_DIR", "script_dir"),
                                 ("INTERVIEWKIT_LLM_MODE", "llm_mode")):
            value = os.environ.get(env_key)
            if value:
                doc[doc_key] = value
        port = int(doc.get("port", 8077))
        if not (0 < port < 65536):
            raise ValueError(f"invalid port {port}")
        script_dir = doc.get("script_dir")
        if script_dir is not None and not Path(script_dir).is_dir():
            raise ValueError(f"script_dir {script_dir!r} does not exist")
        session = DEFAULT_SESSION
        if "fluency" in doc:
            fl = doc["fluency"]
            session = SessionConfig(engine=EngineConfig(
                followup_mode=FollowupMode(doc.get("followup_mode", "template")),
                fluency=FluencyConfig(
                    standard_timeout_s=float(fl.get("standard_timeout_s", 3.0)),
                    low_timeout_s=float(fl.get("low_timeout_s", 6.0)),
                    low_rate_factor=float(fl.get("low_rate_factor", 0.8)),
                )))
        return cls(
            port=port,
            data_dir=Path(doc.get("data_dir", "data")),
            script_dir=Path(script_dir) if script_dir else None,
            llm_mode=str(doc.get("llm_mode", "mock")),
            heartbeat_s=float(doc.get("heartbeat_s", 10.0)),
            idle_expiry_s=float(doc.get("idle_expiry_s", 900.0)),
            session=session,
        )


@dataclass
class LiveSession:
    session: InterviewSession
    lock: threading.Lock = field(default_factory=threading.Lock)
    connected: bool = False
    last_client_event: float = field(default_factory=time.monotonic)


@dataclass
class RunState:
    run_id: str
    status: str = "running"  # running | completed | failed
    error: str | None = None
    run_dir: str | None = None


class SessionManager:
    """All cross-request state: scripts, sessions, the store, pipeline runs."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.store = TranscriptStore(config.data_dir / "sessions")
        self.scripts = ScriptRegistry(config.script_dir)
        if config.llm_mode == "live":
            self.llm = HttpLanguageModel(ClientConfig.from_env())
        else:
            self.llm = MockLanguageModel()
        self.sessions: dict[str, LiveSession] = {}
        self.runs: dict[str, RunState] = {}
        self._lock = threading.Lock()

    def create_session(self, script_id: str, agent_profile: str) -> LiveSession:
        script = self.scripts.get(script_id)  # ScriptError when unknown
        profile = AgentProfile(agent_profile)
        session_id = uuid.uuid4().hex[:12]
        started_at = datetime.now(timezone.utc).isoformat().replace("+00:00", "Z")
        session = InterviewSession(
            script, session_id, profile, started_at,
            store=self.store, config=self.config.session, llm=self.llm)
        session.start()  # queue the first base question
        live = LiveSession(session=session)
        with self._lock:
            self.sessions[session_id] = live
        return live

    def get_session(self, session_id: str) -> LiveSession:
        with self._lock:
            live = self.sessions.get(session_id)
        if live is None:
            raise NotFoundError(f"unknown session {session_id!r}")
        return live

    def start_pipeline_run(self, session_ids: list[str],
                           extra_queries: list[str]) -> RunState:
        run_id = uuid.uuid4().hex[:12]
        run_dir = self.config.data_dir / "runs" / run_id
        state = RunState(run_id=run_id, run_dir=str(run_dir))
        with self._lock:
            self.runs[run_id] = state

        def work() -> None:
            try:
                run_pipeline(self.store, session_ids,
                             PipelineConfig(run_dir=run_dir,
                                            extra_queries=tuple(extra_queries)),
                             self.llm, self.scripts.get)
                state.status = "completed"
            except Exception as exc:  # noqa: BLE001 - surfaced via run status
                logger.exception("pipeline run %s failed", run_id)
                state.status = "failed"
                state.error = str(exc)

        threading.Thread(target=work, daemon=True).start()
        return state

    def get_run(self, run_id: str) -> RunState:
        with self._lock:
            run = self.runs.get(run_id)
        if run is None:
            raise NotFoundError(f"unknown run {run_id!r}")
        return run


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    manager = SessionManager(config)
    app = FastAPI(title="interviewkit session service")
    app.state.manager = manager

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/sessions", status_code=201)
    def create_session(body: dict):
        script_id = str(body.get("script_id", "default"))
        agent_profile = str(body.get("agent_profile", "android_like"))
        try:
            live = manager.create_session(script_id, agent_profile)
        except ScriptError as exc:
            return JSONResponse({"error": str(exc)}, status_code=404)
        except ValueError as exc:
            return JSONResponse({"error": str(exc)}, status_code=422)
        return {"session_id": live.session.session_id, "script_id": script_id,
                "stream": f"/sessions/{live.session.session_id}/stream"}

    @app.get("/sessions/{session_id}/transcript")
    def get_transcript(session_id: str):
        if manager.store.is_finalized(session_id):
            # serve the stored document verbatim
            raw = manager.store.json_path(session_id).read_bytes()
            return Response(content=raw, media_type="application/json")
        try:
            live = manager.get_session(session_id)
        except NotFoundError:
            return JSONResponse({"error": "unknown session"}, status_code=404)
        return JSONResponse(live.session.transcript.to_dict())

    @app.post("/pipeline/runs", status_code=202)
    def create_run(body: dict):
        requested = body.get("session_ids", "all")
        if requested == "all":
            session_ids = [sid for sid in manager.store.list_sessions()
                           if manager.store.is_finalized(sid)]
        else:
            session_ids = [str(s) for s in requested]
        if not session_ids:
            return JSONResponse({"error": "no sessions to analyze"}, status_code=422)
        for sid in session_ids:
            if not manager.store.exists(sid):
                return JSONResponse({"error": f"unknown session {sid!r}"}, status_code=404)
            if not manager.store.is_finalized(sid):
                return JSONResponse({"error": f"session {sid!r} is not finalized"},
                                    status_code=409)
        run = manager.start_pipeline_run(session_ids,
                                         [str(q) for q in body.get("extra_queries", [])])
        return {"run_id": run.run_id, "status": run.status}

    @app.get("/pipeline/runs/{run_id}")
    def get_run(run_id: str):
        try:
            run = manager.get_run(run_id)
        except NotFoundError:
            return JSONResponse({"error": "unknown run"}, status_code=404)
        body = {"run_id": run.run_id, "status": run.status}
        if run.error:
            body["error"] = run.error
        if run.status == "completed" and run.run_dir:
            base = Path(run.run_dir)
            body["artifacts"] = {
                "report": str(base / "report.json"),
                "deck": str(base / "deck.md"),
                "narration": str(base / "narration.txt"),
            }
        return body

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(websocket: WebSocket, session_id: str, after_seq: int = 0):
        await websocket.accept()
        try:
            live = manager.get_session(session_id)
        except NotFoundError:
            await websocket.send_json({"type": "error", "error": "unknown-session"})
            await websocket.close(code=1008)
            return
        with live.lock:
            if live.connected:
                await websocket.send_json({"type": "error", "error": "already-connected"})
                await websocket.close(code=1008)
                return
            live.connected = True
            backlog = [e for e in live.session.server_events if e.seq > after_seq]
        try:
            for event in backlog:
                await websocket.send_json(event.to_wire())
            live.last_client_event = time.monotonic()
            receiver = asyncio.create_task(_receive_loop(websocket, live))
            monitor = asyncio.create_task(_timeout_loop(websocket, live, config))
            heartbeat = asyncio.create_task(_heartbeat_loop(websocket, config.heartbeat_s))
            done, pending = await asyncio.wait(
                {receiver, monitor, heartbeat}, return_when=asyncio.FIRST_COMPLETED)
            for task in pending:
                task.cancel()
            for task in done:
                exc = task.exception()
                if exc is not None and not isinstance(exc, WebSocketDisconnect):
                    raise exc
        except WebSocketDisconnect:
            pass
        finally:
            live.connected = False

    return app


async def _send_events(websocket: WebSocket, events: list[ServerEvent],
                       session_id: str = "") -> None:
    for event in events:
        logger.info("event session=%s seq=%d transcript_seq=%d type=%s t=%.0f",
                    session_id, event.seq, event.transcript_seq, event.type, event.t)
        await websocket.send_json(event.to_wire())


def _handle_client_message(live: LiveSession, doc: dict) -> list[ServerEvent]:
    """Runs under the session lock; returns the server events to deliver."""
    session = live.session
    kind = doc.get("type")
    if kind == "user_text":
        utterance = UserUtterance(
            text=str(doc.get("text", "")),
            duration_s=float(doc.get("duration_s", 0.0)) or 0.001,
        )
        return session.on_user_turn(utterance)
    if kind == "prosody_frame":
        frame = ProsodyFrame(t=float(doc.get("t", 0.0)), voiced=bool(doc.get("voiced")),
                             f0=float(doc.get("f0", 0.0)), power=float(doc.get("power", 0.0)))
        return session.feed_frame(frame)
    if kind == "voice_activity":
        return []  # activity begin/end only refreshes the idle clock
    raise ValueError(f"unknown client event type {kind!r}")


async def _receive_loop(websocket: WebSocket, live: LiveSession) -> None:
    while True:
        raw = await websocket.receive_text()
        live.last_client_event = time.monotonic()
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError:
            await websocket.send_json({"type": "error", "error": "malformed-json"})
            continue
        try:
            with live.lock:
                events = _handle_client_message(live, doc)
        except SessionClosedError:
            await websocket.send_json({"type": "error", "error": "session-closed"})
            continue
        except (ValueError, InterviewKitError) as exc:
            await websocket.send_json({"type": "error", "error": str(exc)})
            continue
        await _send_events(websocket, events, live.session.session_id)
        if live.session.done:
            with live.lock:
                live.session.finalize()


async def _timeout_loop(websocket: WebSocket, live: LiveSession,
                        config: ServiceConfig) -> None:
    """Inject synthetic silence turns when the participant goes quiet."""
    while True:
        await asyncio.sleep(config.timeout_poll_s)
        if live.session.done:
            continue
        idle = time.monotonic() - live.last_client_event
        if idle >= config.idle_expiry_s:
            with live.lock:
                live.session.finalize(status="incomplete")
            await websocket.send_json({"type": "error", "error": "session-expired"})
            await websocket.close(code=1000)
            return
        if idle >= live.session.state.fluency.turn_timeout_s:
            with live.lock:
                if live.session.done:
                    continue
                events = live.session.on_timeout()
            live.last_client_event = time.monotonic()
            await _send_events(websocket, events, live.session.session_id)
            if live.session.done:
                with live.lock:
                    live.session.finalize()


async def _heartbeat_loop(websocket: WebSocket, interval_s: float) -> None:
    while True:
        await asyncio.sleep(interval_s)
        await websocket.send_json({"type": "heartbeat", "t": time.monotonic()})


def serve(config: ServiceConfig) -> None:
    """Blocking entry point used by the CLI."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host="0.0.0.0", port=config.port, log_level="info")
