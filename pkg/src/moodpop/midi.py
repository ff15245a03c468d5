"""Standard MIDI File serialization and the NDJSON wire format.

The writer emits format-1 files at 480 ticks per quarter: one tempo track
followed by one track per engine track, each carrying a name meta event,
a program change (pitched tracks only) and explicit note-on/note-off
pairs.  No running status is used and note-offs sort before note-ons at
the same tick, so output bytes are a pure function of the event stream.

The reader inverts the writer (it also accepts running status and
zero-velocity note-ons, so files from other tools usually load too) and
reports malformed input with the byte offset where parsing failed.

Wire frames are single-line JSON objects.  Note frames are
{"t", "track", "pitch", "vel", "dur"} with no "type" key; marker frames
carry "type" ("tempo", "bar", "error").  Every frame has a "t" in seconds
and frames are emitted in non-decreasing t.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass

from .config import EngineConfig
from .engine import TRACKS, NoteEvent, TempoEvent, TempoMap
from .errors import SmfError

__all__ = [
    "TICKS_PER_QUARTER",
    "write_smf",
    "read_smf",
    "encode_frame",
    "note_frame",
    "tempo_frame",
    "bar_frame",
    "error_frame",
    "wire_frames",
]

TICKS_PER_QUARTER = 480
_TRACK_INDEX = {name: i for i, name in enumerate(TRACKS)}

# ticks are exact because every engine position is a multiple of 1/8 beat
_TICKS_PER_EIGHTH = TICKS_PER_QUARTER // 8


def _tick(beats: float) -> int:
    ticks = beats * TICKS_PER_QUARTER
    out = round(ticks)
    if abs(ticks - out) > 1e-6:
        raise SmfError(f"onset {beats} beats is not representable on the tick grid")
    return out


def _vlq(value: int) -> bytes:
    """Variable-length quantity, the SMF delta-time encoding."""
    if value < 0:
        raise SmfError(f"negative delta time {value}")
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    return bytes(reversed(out))


def _chunk(tag: bytes, payload: bytes) -> bytes:
    return tag + struct.pack(">I", len(payload)) + payload


def _meta(delta: int, kind: int, payload: bytes) -> bytes:
    return _vlq(delta) + bytes((0xFF, kind)) + _vlq(len(payload)) + payload


def write_smf(
    events: list[NoteEvent], tempo_map: TempoMap, config: EngineConfig
) -> bytes:
    """Serialize an event stream to SMF bytes (deterministic)."""
    header = struct.pack(">hhh", 1, 1 + len(TRACKS), TICKS_PER_QUARTER)

    tempo_payload = b""
    cursor = 0
    for entry in tempo_map.events:
        tick = _tick(entry.beat)
        tempo_payload += _meta(tick - cursor, 0x51,
                               struct.pack(">I", entry.us_per_quarter)[1:])
        cursor = tick
    tempo_payload += _meta(0, 0x2F, b"")
    chunks = [_chunk(b"MTrk", tempo_payload)]

    by_track: dict[str, list[NoteEvent]] = {name: [] for name in TRACKS}
    for event in events:
        by_track[event.track].append(event)

    for name in TRACKS:
        channel = config.channels[name]
        payload = _meta(0, 0x03, name.encode("ascii"))
        if name != "percussion":
            payload += _vlq(0) + bytes((0xC0 | channel, config.programs[name]))
        # (tick, off-before-on rank, pitch, velocity)
        messages: list[tuple[int, int, int, int]] = []
        for e in sorted(by_track[name], key=lambda e: (e.onset, e.pitch)):
            on = _tick(e.onset)
            off = _tick(e.onset + e.duration)
            if off <= on:
                raise SmfError(f"non-positive duration at beat {e.onset} on {name}")
            messages.append((on, 1, e.pitch, e.velocity))
            messages.append((off, 0, e.pitch, 0))
        messages.sort()
        cursor = 0
        for tick, rank, pitch, velocity in messages:
            status = (0x90 if rank else 0x80) | channel
            payload += _vlq(tick - cursor) + bytes((status, pitch, velocity))
            cursor = tick
        payload += _meta(0, 0x2F, b"")
        chunks.append(_chunk(b"MTrk", payload))

    return _chunk(b"MThd", header) + b"".join(chunks)


class _Reader:
    """Byte cursor that raises SmfError with the failing offset."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise SmfError("unexpected end of file", offset=self.pos)
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def byte(self) -> int:
        return self.take(1)[0]

    def vlq(self) -> int:
        value = 0
        for _ in range(4):
            b = self.byte()
            value = (value << 7) | (b & 0x7F)
            if not b & 0x80:
                return value
        raise SmfError("variable-length quantity too long", offset=self.pos)


def read_smf(data: bytes) -> tuple[list[NoteEvent], list[TempoEvent]]:
    """Parse SMF bytes back into (events, tempo entries).

    Exact inverse of write_smf on files it produced; tolerant of running
    status and note-on-velocity-zero offs from other writers.
    """
    r = _Reader(data)
    if r.take(4) != b"MThd":
        raise SmfError("not a MIDI file (bad header chunk tag)", offset=0)
    (hlen,) = struct.unpack(">I", r.take(4))
    if hlen < 6:
        raise SmfError(f"header chunk too short ({hlen})", offset=r.pos - 4)
    fmt, ntrks, division = struct.unpack(">hhh", r.take(6))
    r.take(hlen - 6)
    if fmt not in (0, 1):
        raise SmfError(f"unsupported SMF format {fmt}", offset=8)
    if division <= 0:
        raise SmfError("SMPTE time division is not supported", offset=12)

    events: list[NoteEvent] = []
    tempos: list[TempoEvent] = []
    for tindex in range(ntrks):
        tag_at = r.pos
        if r.take(4) != b"MTrk":
            raise SmfError(f"bad track chunk tag in track {tindex}", offset=tag_at)
        (length,) = struct.unpack(">I", r.take(4))
        end = r.pos + length
        if end > len(r.data):
            raise SmfError(f"track {tindex} length runs past end of file",
                           offset=r.pos - 4)
        name: str | None = None
        tick = 0
        status = 0
        open_notes: dict[int, list[tuple[int, int]]] = {}

        def track_label() -> str:
            return name if name is not None else f"track {tindex}"

        while r.pos < end:
            tick += r.vlq()
            first_at = r.pos
            first = r.byte()
            if first == 0xFF:
                kind = r.byte()
                payload = r.take(r.vlq())
                if kind == 0x03:
                    name = payload.decode("ascii", errors="replace")
                elif kind == 0x51:
                    us = int.from_bytes(payload, "big")
                    tempos.append(TempoEvent(tick / division, us))
                elif kind == 0x2F:
                    break
                continue
            if first in (0xF0, 0xF7):
                r.take(r.vlq())
                continue
            if first & 0x80:
                status = first
                data1 = r.byte()
            else:  # running status reuses the previous status byte
                if not status:
                    raise SmfError("data byte with no running status",
                                   offset=first_at)
                data1 = first
            kind = status & 0xF0
            if kind in (0x80, 0x90, 0xA0, 0xB0, 0xE0):
                data2 = r.byte()
            elif kind in (0xC0, 0xD0):
                data2 = None
            else:
                raise SmfError(f"unsupported status byte 0x{status:02X}",
                               offset=first_at)
            is_on = kind == 0x90 and data2 > 0
            is_off = kind == 0x80 or (kind == 0x90 and data2 == 0)
            if is_on:
                open_notes.setdefault(data1, []).append((tick, data2))
            elif is_off:
                stack = open_notes.get(data1)
                if not stack:
                    raise SmfError(
                        f"note-off without note-on ({track_label()}, pitch {data1})",
                        offset=first_at)
                on_tick, velocity = stack.pop(0)
                if name not in _TRACK_INDEX:
                    raise SmfError(
                        f"notes on unrecognized track {track_label()!r}",
                        offset=first_at)
                if tick <= on_tick:
                    raise SmfError(
                        f"zero-length note ({track_label()}, pitch {data1})",
                        offset=first_at)
                events.append(NoteEvent(
                    onset=on_tick / division, track=name, pitch=data1,
                    velocity=velocity, duration=(tick - on_tick) / division))
        leftovers = {p: s for p, s in open_notes.items() if s}
        if leftovers:
            pitches = sorted(leftovers)
            raise SmfError(
                f"note-on without note-off ({track_label()}, "
                f"pitches {pitches})", offset=r.pos)
        r.pos = end

    events.sort(key=lambda e: (e.onset, _TRACK_INDEX[e.track], e.pitch, e.duration))
    return events, tempos


# ---------------------------------------------------------------------------
# NDJSON wire frames
# ---------------------------------------------------------------------------


def _t(seconds: float) -> float:
    # microsecond-rounded timestamps keep the JSON short and stable
    return round(seconds, 6)


def note_frame(event: NoteEvent, tempo_map: TempoMap) -> dict:
    start = tempo_map.seconds_at(event.onset)
    end = tempo_map.seconds_at(event.onset + event.duration)
    return {"t": _t(start), "track": event.track, "pitch": event.pitch,
            "vel": event.velocity, "dur": _t(end - start)}


def tempo_frame(entry: TempoEvent, tempo_map: TempoMap) -> dict:
    return {"type": "tempo", "t": _t(tempo_map.seconds_at(entry.beat)),
            "bpm": round(entry.bpm, 4)}


def bar_frame(index: int, tempo_map: TempoMap) -> dict:
    return {"type": "bar", "t": _t(tempo_map.seconds_at(index * 4.0)),
            "index": index}


def error_frame(message: str, t: float = 0.0) -> dict:
    return {"type": "error", "t": _t(t), "message": message}


def encode_frame(frame: dict) -> str:
    """One wire line (no trailing newline); key order fixed for determinism."""
    return json.dumps(frame, sort_keys=True, separators=(",", ":"))


_FRAME_RANK = {"tempo": 0, "bar": 1}


def wire_frames(
    events: list[NoteEvent], tempo_map: TempoMap, bars: int
) -> list[dict]:
    """A whole excerpt as ordered wire frames: tempo and bar markers woven
    between note frames, non-decreasing in t."""
    keyed: list[tuple[float, int, int, dict]] = []
    for entry in tempo_map.events:
        keyed.append((entry.beat, 0, 0, tempo_frame(entry, tempo_map)))
    for index in range(bars):
        keyed.append((index * 4.0, 1, 0, bar_frame(index, tempo_map)))
    for i, event in enumerate(events):
        keyed.append((event.onset, 2, i, note_frame(event, tempo_map)))
    keyed.sort(key=lambda k: k[:3])
    return [frame for _, _, _, frame in keyed]
