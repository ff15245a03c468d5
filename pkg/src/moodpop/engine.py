"""Bar-by-bar arranger: emotion in, timed multi-track note events out.

The engine advances in beats.  At each bar boundary it makes a *bar plan*:
the chord (restricted walk over the banded graph), this bar's rhythm
patterns, the strummed voicing and register move, the plucked texture and
the melody content, all drawn from per-track RNG streams keyed by
(seed, stream id, bar).  At each beat boundary it drains the pending
emotion update and stamps velocity and tempo.  Structure therefore reacts
within one bar and dynamics within one beat, and batch rendering and
real-time stepping share this single code path, so their output is
identical by construction.

Draw order within each bar's streams (changing this breaks seeds):

* harmony: one successor draw.
* bass: pattern draw at bars divisible by 8, then one root/fifth draw
  per onset in offset order.
* strummed: pattern draw (every bar), then one register-move draw.
* plucked: onset-placement draw, then one tone draw per onset (silent
  bars draw nothing).
* melody: first half of a section: onset placement then one matrix draw
  per onset; bar 4 of a section: one motif draw; bars 5-7: none.
* percussion: pattern draw at bars divisible by 8.

All onsets and durations are multiples of 1/8 beat, so beat arithmetic
is exact in floats and positions map to integer MIDI ticks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import rng as rngmod
from .config import TONIC_PCS, EngineConfig
from .emotion import (
    EmotionPoint,
    EmotionTrajectory,
    roughness_for,
    tempo_for,
    velocity_for,
)
from .errors import ConfigError
from .harmony import chord_tones, next_chord, tonic_chord
from .performers import (
    Voicing,
    melody_matrix_bar,
    melody_second_half,
    bass_notes,
    plucked_notes,
    strummed_voicing,
    register_step,
    voicing_candidates,
)
from .rhythm import BEATS_PER_BAR, select_pattern

__all__ = [
    "TRACKS",
    "NoteEvent",
    "TempoEvent",
    "TempoMap",
    "ExcerptSpec",
    "Engine",
    "generate_excerpt",
]

TRACKS = ("percussion", "bass", "strummed_gtr", "plucked_gtr", "violins", "french_horn")
_TRACK_INDEX = {name: i for i, name in enumerate(TRACKS)}

ACCENT_BOOST = 8
MICROSECONDS_PER_MINUTE = 60_000_000

STATE_VERSION = 1


@dataclass(frozen=True, order=True)
class NoteEvent:
    """One note: onset/duration in beats from the excerpt start."""

    onset: float
    track: str
    pitch: int
    velocity: int
    duration: float

    def __post_init__(self) -> None:
        if self.track not in _TRACK_INDEX:
            raise ValueError(f"unknown track {self.track!r}")
        if not 0 <= self.pitch <= 127:
            raise ValueError(f"pitch {self.pitch} outside MIDI range")
        if not 1 <= self.velocity <= 127:
            raise ValueError(f"velocity {self.velocity} outside 1-127")
        if self.duration <= 0:
            raise ValueError("duration must be positive")


@dataclass(frozen=True)
class TempoEvent:
    """Tempo from this beat onward, quantized to integer us per quarter."""

    beat: float
    us_per_quarter: int

    @property
    def bpm(self) -> float:
        return MICROSECONDS_PER_MINUTE / self.us_per_quarter


def us_per_quarter_for(arousal: float, lo: float, hi: float) -> int:
    """Quantized tempo for an arousal level; the SMF stores exactly this."""
    return round(MICROSECONDS_PER_MINUTE / tempo_for(arousal, lo, hi))


class TempoMap:
    """Piecewise-constant tempo over beats; converts positions to seconds."""

    def __init__(self, events: list[TempoEvent]):
        if not events:
            raise ValueError("tempo map needs at least one entry")
        if events[0].beat != 0.0:
            raise ValueError("tempo map must start at beat 0")
        beats = [e.beat for e in events]
        if beats != sorted(beats):
            raise ValueError("tempo events must be sorted by beat")
        self.events = list(events)

    def seconds_at(self, beat: float) -> float:
        """Wall-clock seconds elapsed at a beat position."""
        total = 0.0
        for cur, nxt in zip(self.events, self.events[1:]):
            if beat <= nxt.beat:
                return total + (beat - cur.beat) * cur.us_per_quarter / 1e6
            total += (nxt.beat - cur.beat) * cur.us_per_quarter / 1e6
        last = self.events[-1]
        return total + (beat - last.beat) * last.us_per_quarter / 1e6


VALID_BAR_COUNTS = (4, 8, 16, 32)


@dataclass(frozen=True)
class ExcerptSpec:
    """A batch render request: length, emotion curve, seed, optional key."""

    bars: int
    trajectory: EmotionTrajectory
    seed: int
    key: str | None = None  # tonic override; None keeps the config key

    def __post_init__(self) -> None:
        if self.bars not in VALID_BAR_COUNTS:
            raise ValueError(f"bars must be one of {VALID_BAR_COUNTS}, got {self.bars}")
        if self.trajectory.last_bar >= self.bars:
            raise ValueError(
                f"trajectory extends to bar {self.trajectory.last_bar} "
                f"but the excerpt has only {self.bars} bars"
            )
        if self.key is not None and self.key not in TONIC_PCS:
            raise ValueError(f"unknown key {self.key!r}")


# A planned note inside one bar, before velocity stamping:
# (offset within bar, track, pitch, duration, accent flag)
_Planned = tuple[float, str, int, float, bool]


@dataclass
class Engine:
    """Single-owner generator state plus the stepping operations.

    With a trajectory the engine drives itself from it (batch mode); with
    trajectory=None emotion arrives via update_emotion (live mode).  Either
    way updates land in a pending slot that is drained at beat boundaries,
    and the whole state serializes to JSON at any beat position.
    """

    config: EngineConfig
    seed: int
    total_bars: int | None = None
    trajectory: EmotionTrajectory | None = None
    start_point: EmotionPoint = field(default_factory=lambda: EmotionPoint(0.5, 0.5))
    key: str | None = None

    def __post_init__(self) -> None:
        self.transpose = 0
        if self.key is not None:
            if self.key not in TONIC_PCS:
                raise ConfigError(f"unknown key {self.key!r}")
            self.transpose = (TONIC_PCS[self.key] - self.config.tonic_pc) % 12
        self.bar = 0
        self.beat_in_bar = 0
        self.point = self.start_point
        self.pending: EmotionPoint | None = None
        if self.trajectory is not None:
            self.point = self.trajectory.at_bar(0)
        self.chord_name: str | None = None
        self.voicing = tuple(self.config.strum_anchor)
        self.voicing_inversion = 0
        self.melody_pitch = self.config.melody_start_pitch
        self.bass_pattern_id: str | None = None
        self.bass_pattern_bar = 0
        self.perc_pattern_id: str | None = None
        self.perc_pattern_bar = 0
        self.motif_id: str | None = None
        self.plan: list[_Planned] = []
        self.last_us: int | None = None
        # realtime bookkeeping: consumed-up-to cursor plus rendered-ahead buffers
        self.cursor = 0.0
        self.buffered_events: list[NoteEvent] = []
        self.buffered_tempo: list[TempoEvent] = []
        self._patterns = {}
        for bank in (self.config.bass_bank, self.config.strummed_bank,
                     self.config.percussion_bank):
            for entries in bank.regions.values():
                for pattern, _ in entries:
                    self._patterns[pattern.pattern_id] = pattern
        self._motifs = {
            m.motif_id: m
            for motifs in self.config.motif_bank.motifs.values()
            for m in motifs
        }

    # -- position helpers ---------------------------------------------------

    @property
    def finished(self) -> bool:
        return self.total_bars is not None and self.bar >= self.total_bars

    @property
    def beat(self) -> float:
        """Render position in beats from the excerpt start."""
        return self.bar * BEATS_PER_BAR + self.beat_in_bar

    # -- emotion input ------------------------------------------------------

    def update_emotion(self, point: EmotionPoint) -> None:
        """Queue an emotion change; dynamics apply at the next rendered beat,
        harmony/voicing/patterns at the next bar boundary."""
        self.pending = point

    def _drain(self) -> None:
        if self.pending is not None:
            self.point = self.pending
            self.pending = None

    # -- the core step ------------------------------------------------------

    def step_beat(self) -> tuple[list[NoteEvent], list[TempoEvent]]:
        """Render one beat; returns its note events and any tempo change."""
        if self.finished:
            return [], []
        if self.beat_in_bar == 0:
            if self.trajectory is not None:
                self.pending = self.trajectory.at_bar(self.bar)
            self._drain()
            self.plan = self._plan_bar()
        else:
            self._drain()

        beat0 = float(self.bar * BEATS_PER_BAR)
        here = float(self.beat_in_bar)
        tempos: list[TempoEvent] = []
        us = us_per_quarter_for(self.point.arousal, self.config.tempo_min,
                                self.config.tempo_max)
        if us != self.last_us:
            tempos.append(TempoEvent(beat0 + here, us))
            self.last_us = us
        vel = velocity_for(self.point.arousal)
        accent_vel = min(127, vel + ACCENT_BOOST)
        events = [
            NoteEvent(onset=beat0 + off, track=track, pitch=pitch,
                      velocity=accent_vel if accent else vel, duration=dur)
            for off, track, pitch, dur, accent in self.plan
            if here <= off < here + 1.0
        ]

        self.beat_in_bar += 1
        if self.beat_in_bar == BEATS_PER_BAR:
            self.beat_in_bar = 0
            self.bar += 1
        return events, tempos

    def render_bar(self) -> list[NoteEvent]:
        """Render the next whole bar (utility over four step_beat calls)."""
        out: list[NoteEvent] = []
        for _ in range(BEATS_PER_BAR):
            events, _tempos = self.step_beat()
            out.extend(events)
        return out

    # -- bar planning -------------------------------------------------------

    def _pitch(self, pitch: int) -> int:
        return pitch + self.transpose

    def _plan_bar(self) -> list[_Planned]:
        cfg = self.config
        bar = self.bar
        val, aro = self.point.valence, self.point.arousal
        roughness = roughness_for(aro, cfg.roughness_floor)
        plan: list[_Planned] = []

        rng_h = rngmod.stream(self.seed, rngmod.HARMONY, bar)
        prev = (cfg.graph.chord(self.chord_name) if self.chord_name
                else tonic_chord(cfg.graph))
        chord = next_chord(cfg.graph, prev, val, rng_h,
                           function=cfg.template.label(bar))
        self.chord_name = chord.name

        rng_p = rngmod.stream(self.seed, rngmod.PERCUSSION, bar)
        if bar % 8 == 0 or self.perc_pattern_id is None:
            pattern = select_pattern(cfg.percussion_bank, aro, rng_p)
            self.perc_pattern_id = pattern.pattern_id
            self.perc_pattern_bar = bar
        else:
            pattern = self._patterns[self.perc_pattern_id]
        for onset in pattern.bar_onsets(bar - self.perc_pattern_bar):
            note = cfg.percussion_voices[onset.voice]
            plan.append((onset.offset, "percussion", note, onset.duration, onset.accent))

        rng_b = rngmod.stream(self.seed, rngmod.BASS, bar)
        if bar % 8 == 0 or self.bass_pattern_id is None:
            pattern = select_pattern(cfg.bass_bank, aro, rng_b)
            self.bass_pattern_id = pattern.pattern_id
            self.bass_pattern_bar = bar
        else:
            pattern = self._patterns[self.bass_pattern_id]
        onsets = pattern.bar_onsets(bar - self.bass_pattern_bar)
        for onset, pitch in bass_notes(chord, onsets, rng_b):
            plan.append((onset.offset, "bass", self._pitch(pitch),
                         onset.duration, onset.accent))

        rng_s = rngmod.stream(self.seed, rngmod.STRUMMED, bar)
        pattern = select_pattern(cfg.strummed_bank, aro, rng_s)
        prev_voicing = Voicing(self.voicing, self.voicing_inversion)
        candidates = voicing_candidates(chord, cfg.strum_bass_range)
        base = strummed_voicing(prev_voicing, chord, candidates)
        max_inv = len(chord_tones(chord)) - 1
        target = register_step(base.inversion, val, rng_s, max_inv)
        voicing = self._shift_voicing(base, target, cfg.strum_bass_range)
        self.voicing = voicing.notes
        self.voicing_inversion = voicing.inversion
        for onset in pattern.bar_onsets(0):
            for pitch in voicing.notes:
                plan.append((onset.offset, "strummed_gtr", self._pitch(pitch),
                             onset.duration, onset.accent))

        rng_pl = rngmod.stream(self.seed, rngmod.PLUCKED, bar)
        for onset, pitch in plucked_notes(chord, aro, roughness, rng_pl):
            plan.append((onset.offset, "plucked_gtr", self._pitch(pitch),
                         onset.duration, onset.accent))

        rng_m = rngmod.stream(self.seed, rngmod.MELODY, bar)
        bar_in_section = bar % 8
        if bar_in_section < 4:
            melody, last = melody_matrix_bar(
                val, self.melody_pitch, cfg.melody_low, cfg.melody_high,
                roughness, rng_m)
            self.melody_pitch = last
            self.motif_id = None
        else:
            if bar_in_section == 4 or self.motif_id is None:
                self.motif_id = melody_second_half(aro, cfg.motif_bank, rng_m).motif_id
            melody = self._motifs[self.motif_id].bar_notes(bar_in_section - 4)
            if melody:
                self.melody_pitch = melody[-1][1]
        for onset, pitch in melody:
            for track in ("violins", "french_horn"):
                plan.append((onset.offset, track, self._pitch(pitch),
                             onset.duration, onset.accent))

        plan.sort(key=lambda e: (e[0], _TRACK_INDEX[e[1]], e[2], e[3]))
        return plan

    @staticmethod
    def _shift_voicing(base: Voicing, target_inversion: int,
                       bass_range: tuple[int, int]) -> Voicing:
        """Rotate a close-position voicing toward the register-step target.

        Up moves the bass note an octave above the top; down does the
        reverse.  A rotation that would leave the playable bass window is
        dropped (the move becomes a no-op, matching the clamp rule).
        """
        if target_inversion == base.inversion:
            return base
        notes = list(base.notes)
        if target_inversion > base.inversion:
            shifted = notes[1:] + [notes[0] + 12]
        else:
            shifted = [notes[-1] - 12] + notes[:-1]
        lo, hi = bass_range
        if not lo <= shifted[0] <= hi:
            return base
        return Voicing(tuple(shifted), target_inversion)

    # -- realtime stepping --------------------------------------------------

    def step_realtime(self, budget_beats: float) -> tuple[list[NoteEvent], list[TempoEvent]]:
        """Consume the next `budget_beats` of the stream.

        Returns every event scheduled in [cursor, cursor + budget); bars are
        rendered through one full bar past the window, so a caller always
        holds a one-bar look-ahead.  Windows partition the stream: nothing
        is lost or duplicated across calls, and a zero budget yields nothing.
        """
        if budget_beats <= 0:
            return [], []
        window_end = self.cursor + budget_beats
        last_needed = math.ceil(window_end / BEATS_PER_BAR) - 1
        while not self.finished and self.bar <= last_needed + 1:
            events, tempos = self.step_beat()
            self.buffered_events.extend(events)
            self.buffered_tempo.extend(tempos)
        due = [e for e in self.buffered_events if e.onset < window_end]
        self.buffered_events = [e for e in self.buffered_events if e.onset >= window_end]
        due_tempo = [t for t in self.buffered_tempo if t.beat < window_end]
        self.buffered_tempo = [t for t in self.buffered_tempo if t.beat >= window_end]
        self.cursor = window_end
        return due, due_tempo

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        """Snapshot the full state as a JSON-safe dict (restorable any time)."""
        return {
            "version": STATE_VERSION,
            "config_digest": self.config.digest,
            "seed": self.seed,
            "total_bars": self.total_bars,
            "key": self.key,
            "trajectory": (None if self.trajectory is None
                           else [[b, p.valence, p.arousal]
                                 for b, p in self.trajectory.entries]),
            "bar": self.bar,
            "beat_in_bar": self.beat_in_bar,
            "point": [self.point.valence, self.point.arousal],
            "pending": (None if self.pending is None
                        else [self.pending.valence, self.pending.arousal]),
            "chord": self.chord_name,
            "voicing": list(self.voicing),
            "voicing_inversion": self.voicing_inversion,
            "melody_pitch": self.melody_pitch,
            "bass_pattern": [self.bass_pattern_id, self.bass_pattern_bar],
            "perc_pattern": [self.perc_pattern_id, self.perc_pattern_bar],
            "motif": self.motif_id,
            "plan": [list(e) for e in self.plan],
            "last_us": self.last_us,
            "cursor": self.cursor,
            "buffered_events": [
                [e.onset, e.track, e.pitch, e.velocity, e.duration]
                for e in self.buffered_events
            ],
            "buffered_tempo": [[t.beat, t.us_per_quarter] for t in self.buffered_tempo],
        }

    @classmethod
    def from_json(cls, config: EngineConfig, data: dict) -> "Engine":
        """Rebuild an engine from to_json output against the same config."""
        if data.get("version") != STATE_VERSION:
            raise ConfigError(f"unsupported state version {data.get('version')!r}")
        if data.get("config_digest") != config.digest:
            raise ConfigError(
                "engine state was saved under a different config "
                f"({data.get('config_digest')} != {config.digest})"
            )
        trajectory = None
        if data["trajectory"] is not None:
            trajectory = EmotionTrajectory.from_points(
                [(int(b), float(v), float(a)) for b, v, a in data["trajectory"]]
            )
        eng = cls(config=config, seed=int(data["seed"]),
                  total_bars=data["total_bars"], trajectory=trajectory,
                  key=data["key"])
        eng.bar = int(data["bar"])
        eng.beat_in_bar = int(data["beat_in_bar"])
        eng.point = EmotionPoint(*data["point"])
        eng.pending = None if data["pending"] is None else EmotionPoint(*data["pending"])
        eng.chord_name = data["chord"]
        eng.voicing = tuple(int(n) for n in data["voicing"])
        eng.voicing_inversion = int(data["voicing_inversion"])
        eng.melody_pitch = int(data["melody_pitch"])
        eng.bass_pattern_id, eng.bass_pattern_bar = data["bass_pattern"]
        eng.perc_pattern_id, eng.perc_pattern_bar = data["perc_pattern"]
        eng.motif_id = data["motif"]
        eng.plan = [
            (float(o), str(t), int(p), float(d), bool(a))
            for o, t, p, d, a in data["plan"]
        ]
        eng.last_us = data["last_us"]
        eng.cursor = float(data["cursor"])
        eng.buffered_events = [
            NoteEvent(onset=float(o), track=str(t), pitch=int(p),
                      velocity=int(v), duration=float(d))
            for o, t, p, v, d in data["buffered_events"]
        ]
        eng.buffered_tempo = [
            TempoEvent(float(b), int(u)) for b, u in data["buffered_tempo"]
        ]
        return eng


def generate_excerpt(
    config: EngineConfig, spec: ExcerptSpec
) -> tuple[list[NoteEvent], TempoMap]:
    """Render a whole excerpt; returns (sorted events, tempo map)."""
    engine = Engine(config=config, seed=spec.seed, total_bars=spec.bars,
                    trajectory=spec.trajectory, key=spec.key)
    events: list[NoteEvent] = []
    tempos: list[TempoEvent] = []
    while not engine.finished:
        step_events, step_tempos = engine.step_beat()
        events.extend(step_events)
        tempos.extend(step_tempos)
    return events, TempoMap(tempos)


def excerpt_duration_seconds(bars: int, tempo_map: TempoMap) -> float:
    """Length of a rendered excerpt: all notes end by the final bar line."""
    return tempo_map.seconds_at(bars * float(BEATS_PER_BAR))
