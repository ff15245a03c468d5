"""HTTP + WebSocket service exposing the engine for live steering.

One engine per session.  A per-session stepper task renders bar by bar
and feeds a bounded frame queue (back-pressure: a slow client stalls the
producer, nothing is dropped).  Control messages arrive over the same
socket and are applied at the engine's beat/bar boundaries, so dynamics
react within a beat and harmony within a bar of the engine's render
position, which runs one bar ahead of the playback clock.

Sessions survive a disconnect for a grace period (default 60 s) and are
then reaped.  A session serves one client at a time.
"""
from __future__ import annotations

import asyncio
import json
import time
import uuid
from contextlib import asynccontextmanager
from dataclasses import dataclass, field

from fastapi import Body, FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.middleware.cors import CORSMiddleware

from .config import EngineConfig, default_config, load_config
from .emotion import EmotionPoint
from .engine import BEATS_PER_BAR, Engine, TempoEvent, TempoMap, VALID_BAR_COUNTS
from .midi import encode_frame, error_frame

__all__ = ["create_app", "run"]

QUEUE_MAX_FRAMES = 512
DEFAULT_SESSION_TTL = 60.0


@dataclass
class _Session:
    sid: str
    engine: Engine
    pacing: bool
    queue: asyncio.Queue = field(default_factory=lambda: asyncio.Queue(QUEUE_MAX_FRAMES))
    clients: int = 0
    started: float = field(default_factory=time.monotonic)
    start_wall: float = field(default_factory=time.monotonic)
    tempo_entries: list[TempoEvent] = field(default_factory=list)
    scheduled: list[tuple[int, EmotionPoint]] = field(default_factory=list)
    t_offset: float = 0.0
    running: asyncio.Event = field(default_factory=asyncio.Event)
    stepper: asyncio.Task | None = None
    reaper: asyncio.Task | None = None
    # frame taken off the queue but possibly unsent when the socket died
    pending_frame: dict | None = None

    def seconds_at(self, beat: float) -> float:
        if not self.tempo_entries:
            return self.t_offset
        return self.t_offset + TempoMap(self.tempo_entries).seconds_at(beat)


async def _step_session(session: _Session) -> None:
    """Render bars into the frame queue until the engine (if bounded) ends."""
    engine = session.engine
    while not engine.finished:
        await session.running.wait()
        if engine is not session.engine:  # seek_seed swapped the engine
            engine = session.engine
            continue
        bar = engine.bar
        due = sorted(u for u in session.scheduled if u[0] <= bar)
        session.scheduled = [u for u in session.scheduled if u[0] > bar]
        for _, point in due:
            engine.update_emotion(point)
        if session.pacing and bar > 0:
            # push each bar exactly one bar ahead of its play time
            target = session.start_wall + session.seconds_at((bar - 1) * BEATS_PER_BAR)
            delay = target - time.monotonic()
            if delay > 0:
                await asyncio.sleep(delay)
        keyed: list[tuple[float, int, dict]] = []
        bar_events = []
        for _ in range(BEATS_PER_BAR):
            events, tempos = engine.step_beat()
            session.tempo_entries.extend(tempos)
            for entry in tempos:
                keyed.append((entry.beat, 0, {
                    "type": "tempo", "t": round(session.seconds_at(entry.beat), 6),
                    "bpm": round(entry.bpm, 4)}))
            bar_events.extend(events)
        keyed.append((bar * float(BEATS_PER_BAR), 1, {
            "type": "bar", "t": round(session.seconds_at(bar * BEATS_PER_BAR), 6),
            "index": bar}))
        for i, event in enumerate(bar_events):
            start = session.seconds_at(event.onset)
            end = session.seconds_at(event.onset + event.duration)
            keyed.append((event.onset, 2 + i, {
                "t": round(start, 6), "track": event.track, "pitch": event.pitch,
                "vel": event.velocity, "dur": round(end - start, 6)}))
        keyed.sort(key=lambda k: k[:2])
        for _, _, frame in keyed:
            await session.queue.put(frame)


def _handle_control(session: _Session, config: EngineConfig, msg: dict) -> dict | None:
    """Apply one control message; returns an error frame dict on rejection."""
    mtype = msg.get("type")
    if mtype == "emotion":
        try:
            point = EmotionPoint(float(msg["valence"]), float(msg["arousal"]))
        except (KeyError, TypeError, ValueError):
            return error_frame("emotion message needs numeric valence and arousal")
        at_bar = msg.get("at_bar")
        if at_bar is None:
            session.engine.update_emotion(point)
        else:
            try:
                session.scheduled.append((int(at_bar), point))
            except (TypeError, ValueError):
                return error_frame("at_bar must be an integer bar index")
        return None
    if mtype == "seek_seed":
        try:
            seed = int(msg["seed"])
        except (KeyError, TypeError, ValueError):
            return error_frame("seek_seed needs an integer seed")
        old = session.engine
        session.t_offset = session.seconds_at(old.beat)
        session.tempo_entries = []
        session.scheduled = []
        session.engine = Engine(config=config, seed=seed,
                                total_bars=old.total_bars,
                                start_point=old.point)
        session.start_wall = time.monotonic()
        return None
    if mtype == "pause":
        session.running.clear()
        return None
    if mtype == "resume":
        session.start_wall = time.monotonic() - (
            session.seconds_at(session.engine.beat) - session.t_offset)
        session.running.set()
        return None
    return error_frame(f"unknown control message type {mtype!r}")


def create_app(
    config: EngineConfig | None = None,
    *,
    session_ttl: float = DEFAULT_SESSION_TTL,
    default_pacing: bool = True,
) -> FastAPI:
    """Build the service app; pacing can be disabled app-wide for tests."""
    from . import __version__

    cfg = config if config is not None else default_config()
    sessions: dict[str, _Session] = {}

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        for session in sessions.values():
            for task in (session.stepper, session.reaper):
                if task:
                    task.cancel()
        sessions.clear()

    app = FastAPI(title="moodpop service", version=__version__, lifespan=lifespan)
    # the browser UI is served from its own port, so session creation is a
    # cross-origin request
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    started = time.monotonic()

    @app.get("/health")
    async def health() -> dict:
        return {
            "status": "ok",
            "version": __version__,
            "uptime_seconds": round(time.monotonic() - started, 3),
            "sessions": len(sessions),
        }

    @app.post("/session")
    async def create_session(payload: dict | None = Body(None)) -> dict:
        body = payload or {}
        bars = body.get("bars")
        if bars is not None and bars not in VALID_BAR_COUNTS:
            raise HTTPException(
                status_code=422,
                detail=f"bars must be one of {list(VALID_BAR_COUNTS)} or null",
            )
        engine = Engine(
            config=cfg,
            seed=int(body.get("seed", 0)),
            total_bars=bars,
            start_point=EmotionPoint(float(body.get("valence", 0.5)),
                                     float(body.get("arousal", 0.5))),
        )
        pacing = bool(body.get("pacing", default_pacing))
        session = _Session(sid=uuid.uuid4().hex[:12], engine=engine, pacing=pacing)
        session.running.set()
        session.stepper = asyncio.create_task(_step_session(session))
        sessions[session.sid] = session
        return {"session_id": session.sid, "ws_url": f"/session/{session.sid}/ws"}

    async def _reap_later(session: _Session) -> None:
        await asyncio.sleep(session_ttl)
        if session.clients == 0:
            if session.stepper:
                session.stepper.cancel()
            sessions.pop(session.sid, None)

    @app.websocket("/session/{sid}/ws")
    async def ws_stream(ws: WebSocket, sid: str) -> None:
        await ws.accept()
        session = sessions.get(sid)
        if session is None:
            await ws.send_text(encode_frame(error_frame(f"unknown session {sid!r}")))
            await ws.close(code=1008)
            return
        if session.clients >= 1:
            await ws.send_text(encode_frame(error_frame("session already has a client")))
            await ws.close(code=1008)
            return
        session.clients += 1
        if session.reaper:
            session.reaper.cancel()
            session.reaper = None

        async def send_frames() -> None:
            while True:
                if session.pending_frame is None:
                    session.pending_frame = await session.queue.get()
                await ws.send_text(encode_frame(session.pending_frame))
                session.pending_frame = None

        def _stamped(frame: dict) -> dict:
            frame["t"] = round(session.seconds_at(session.engine.beat), 6)
            return frame

        sender = asyncio.create_task(send_frames())
        try:
            while True:
                text = await ws.receive_text()
                try:
                    msg = json.loads(text)
                    if not isinstance(msg, dict):
                        raise ValueError("not an object")
                except ValueError:
                    await session.queue.put(
                        _stamped(error_frame("malformed JSON control message")))
                    continue
                reply = _handle_control(session, cfg, msg)
                if reply is not None:
                    await session.queue.put(_stamped(reply))
        except WebSocketDisconnect:
            pass
        finally:
            sender.cancel()
            session.clients -= 1
            if session.clients == 0:
                session.reaper = asyncio.create_task(_reap_later(session))

    return app


def run(host: str, port: int, config_path: str | None = None,
        *, default_pacing: bool = True) -> None:
    """Blocking entry point used by the CLI."""
    import uvicorn

    cfg = load_config(config_path) if config_path else default_config()
    uvicorn.run(create_app(cfg, default_pacing=default_pacing),
                host=host, port=port, log_level="info")
