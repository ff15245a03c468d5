"""Service-level tests over the in-process ASGI app.

Pacing is disabled so the stepper free-runs against queue back-pressure;
sessions with no bar bound never exhaust, which keeps scans non-blocking.
"""

import json

import pytest
from fastapi import WebSocketDisconnect
from fastapi.testclient import TestClient

from moodpop.config import default_config
from moodpop.emotion import EmotionTrajectory
from moodpop.engine import ExcerptSpec, generate_excerpt
from moodpop.midi import wire_frames
from moodpop.service import create_app


@pytest.fixture
def client():
    with TestClient(create_app(default_pacing=False)) as c:
        yield c


def _session(client, **body):
    resp = client.post("/session", json=body)
    assert resp.status_code == 200, resp.text
    return resp.json()


def _read(ws, n):
    return [json.loads(ws.receive_text()) for _ in range(n)]


def _scan_notes(ws, stop, limit=30000):
    """Read frames until stop(frame) is true on a note frame; return all."""
    frames = []
    for _ in range(limit):
        frame = json.loads(ws.receive_text())
        frames.append(frame)
        if "type" not in frame and stop(frame):
            return frames
    raise AssertionError(f"condition not met within {limit} frames")


class TestHttp:
    def test_health(self, client):
        resp = client.get("/health")
        assert resp.status_code == 200
        body = resp.json()
        assert body["status"] == "ok"
        assert body["sessions"] == 0
        assert body["uptime_seconds"] >= 0

    def test_health_counts_sessions(self, client):
        _session(client, bars=8)
        assert client.get("/health").json()["sessions"] == 1

    def test_unknown_route(self, client):
        assert client.get("/nope").status_code == 404

    def test_session_shape(self, client):
        body = _session(client, seed=1, bars=8)
        sid = body["session_id"]
        assert body["ws_url"] == f"/session/{sid}/ws"

    def test_bad_bar_count_rejected(self, client):
        resp = client.post("/session", json={"bars": 5})
        assert resp.status_code == 422
        assert "bars" in resp.json()["detail"]

    def test_cross_origin_requests_allowed(self, client):
        # the browser UI runs on a different port than the service
        resp = client.get("/health", headers={"origin": "http://localhost:8080"})
        assert resp.headers["access-control-allow-origin"] == "*"
        preflight = client.options("/session", headers={
            "origin": "http://localhost:8080",
            "access-control-request-method": "POST",
        })
        assert preflight.status_code == 200
        assert "POST" in preflight.headers["access-control-allow-methods"]


class TestStream:
    def test_matches_batch_wire_frames(self, client):
        """The live stream is frame-for-frame the batch wire encoding."""
        spec = ExcerptSpec(bars=8, seed=7,
                           trajectory=EmotionTrajectory.constant(0.5, 0.3))
        events, tempo_map = generate_excerpt(default_config(), spec)
        expected = wire_frames(events, tempo_map, 8)

        body = _session(client, seed=7, bars=8, valence=0.5, arousal=0.3)
        with client.websocket_connect(body["ws_url"]) as ws:
            got = _read(ws, len(expected))
        assert got == expected

    def test_leads_with_tempo_then_bar_marker(self, client):
        body = _session(client, bars=8)
        with client.websocket_connect(body["ws_url"]) as ws:
            frames = _read(ws, 10)
        assert frames[0]["type"] == "tempo"
        assert frames[0]["t"] == 0.0
        assert frames[1] == {"type": "bar", "t": 0.0, "index": 0}
        assert [f["t"] for f in frames] == sorted(f["t"] for f in frames)

    def test_same_seed_same_stream(self, client):
        a = _session(client, seed=42)
        b = _session(client, seed=42)
        with client.websocket_connect(a["ws_url"]) as ws:
            frames_a = _read(ws, 100)
        with client.websocket_connect(b["ws_url"]) as ws:
            frames_b = _read(ws, 100)
        assert frames_a == frames_b


class TestControls:
    def test_emotion_switches_velocity_and_tempo(self, client):
        """Steering from calm to excited flips note velocities in one step
        and retunes the tempo at or before the first loud note."""
        body = _session(client, seed=0, valence=0.0, arousal=0.0)
        with client.websocket_connect(body["ws_url"]) as ws:
            ws.send_text(json.dumps(
                {"type": "emotion", "valence": 1.0, "arousal": 1.0}))
            frames = _scan_notes(ws, lambda f: f["vel"] >= 75)
        vels = [f["vel"] for f in frames if "type" not in f]
        switch = next(i for i, v in enumerate(vels) if v >= 75)
        assert switch > 0
        assert set(vels[:switch]) <= {60, 68}
        bpms = [f["bpm"] for f in frames if f.get("type") == "tempo"]
        # quantized to whole microseconds per quarter, hence not exactly 130
        assert bpms[-1] == pytest.approx(130.0, abs=0.001)

    def test_emotion_at_bar_defers(self, client):
        body = _session(client, seed=0, valence=0.0, arousal=0.0)
        with client.websocket_connect(body["ws_url"]) as ws:
            ws.send_text(json.dumps({"type": "emotion", "valence": 1.0,
                                     "arousal": 1.0, "at_bar": 6}))
            frames = _scan_notes(ws, lambda f: f["vel"] >= 75)
        # nothing loud may appear before the bar-6 marker
        bar6 = next(i for i, f in enumerate(frames)
                    if f.get("type") == "bar" and f["index"] == 6)
        early = [f["vel"] for f in frames[:bar6] if "type" not in f]
        assert all(v < 75 for v in early)

    def test_pause_resume_keeps_content(self, client):
        control = _session(client, seed=11)
        with client.websocket_connect(control["ws_url"]) as ws:
            reference = _read(ws, 150)

        probed = _session(client, seed=11)
        with client.websocket_connect(probed["ws_url"]) as ws:
            first = _read(ws, 50)
            ws.send_text(json.dumps({"type": "pause"}))
            ws.send_text(json.dumps({"type": "resume"}))
            rest = _read(ws, 100)
        assert first + rest == reference

    def test_unknown_control_type(self, client):
        body = _session(client, seed=0)
        with client.websocket_connect(body["ws_url"]) as ws:
            ws.send_text(json.dumps({"type": "dance"}))
            frames = []
            for _ in range(2000):
                frame = json.loads(ws.receive_text())
                frames.append(frame)
                if frame.get("type") == "error":
                    break
            assert frames[-1]["type"] == "error"
            assert "unknown control message type" in frames[-1]["message"]
            # the stream keeps going after the rejection
            more = _read(ws, 20)
        assert all("t" in f for f in more)

    def test_malformed_json_control(self, client):
        body = _session(client, seed=0)
        with client.websocket_connect(body["ws_url"]) as ws:
            ws.send_text("{not json")
            for _ in range(2000):
                frame = json.loads(ws.receive_text())
                if frame.get("type") == "error":
                    assert "malformed JSON" in frame["message"]
                    return
        raise AssertionError("error frame never arrived")


class TestWsEdges:
    def test_unknown_session(self, client):
        with client.websocket_connect("/session/nope/ws") as ws:
            frame = json.loads(ws.receive_text())
            assert frame["type"] == "error"
            assert "unknown session" in frame["message"]
            with pytest.raises(WebSocketDisconnect) as exc:
                ws.receive_text()
            assert exc.value.code == 1008

    def test_second_client_rejected(self, client):
        body = _session(client, seed=0)
        with client.websocket_connect(body["ws_url"]) as first:
            first.receive_text()
            with client.websocket_connect(body["ws_url"]) as second:
                frame = json.loads(second.receive_text())
                assert frame["type"] == "error"
                assert "already has a client" in frame["message"]
                with pytest.raises(WebSocketDisconnect) as exc:
                    second.receive_text()
                assert exc.value.code == 1008
            # the original stream is unaffected
            json.loads(first.receive_text())
