"""Per-instrument note generation.

Bass plays roots and fifths; the plucked guitar sprinkles chord tones at
low arousal; the strummed guitar voice-leads chord voicings and drifts
register through inversions; the melody (violins doubled by French horn)
alternates Markov-chain voice leading with composed motifs.

All functions are pure given an explicit RNG; the engine hands each one
its own per-bar stream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .emotion import RegionSpec, classify_region
from .errors import ConfigError
from .harmony import Chord, chord_tones
from .rhythm import Onset, density_from_roughness, grid_onsets

__all__ = [
    "Voicing",
    "TransitionMatrix",
    "Motif",
    "MotifNote",
    "MotifBank",
    "BASS_BASE",
    "PLUCKED_BASE",
    "STRUM_BASS_RANGE",
    "bass_notes",
    "plucked_notes",
    "dissimilarity",
    "voicing_candidates",
    "strummed_voicing",
    "register_step",
    "melody_step",
    "melody_matrix_bar",
    "melody_first_half",
    "melody_second_half",
]

BASS_BASE = 36  # C2; bass pitches land in [36, 47]
PLUCKED_BASE = 60  # C4; plucked pitches land in [60, 71]
PLUCKED_MAX_AROUSAL = 0.7  # plucked guitar drops out at and above this
STRUM_BASS_RANGE = (48, 67)  # playable bass-note window for strummed voicings
PLUCKED_NOTE_BEATS = 0.5


@dataclass(frozen=True)
class Voicing:
    """Concrete pitches (ascending MIDI notes) realizing a chord inversion."""

    notes: tuple[int, ...]
    inversion: int = 0

    def __post_init__(self) -> None:
        if not self.notes:
            raise ValueError("voicing must contain at least one note")
        if any(b <= a for a, b in zip(self.notes, self.notes[1:])):
            raise ValueError(f"voicing notes must strictly ascend: {self.notes}")
        if self.inversion < 0 or self.inversion >= len(self.notes):
            raise ValueError(f"inversion {self.inversion} out of range for {self.notes}")

    @property
    def bass(self) -> int:
        return self.notes[0]


def dissimilarity(a: Voicing, b: Voicing) -> int:
    """Total voice movement in semitones between two voicings.

    The shorter voicing is padded by doubling its top note so voices pair
    index-wise; the result is 0 exactly when the note lists are identical.
    """
    na, nb = list(a.notes), list(b.notes)
    while len(na) < len(nb):
        na.append(na[-1])
    while len(nb) < len(na):
        nb.append(nb[-1])
    return sum(abs(x - y) for x, y in zip(na, nb))


def voicing_candidates(
    chord: Chord, bass_range: tuple[int, int] = STRUM_BASS_RANGE
) -> list[Voicing]:
    """Every close-position inversion of `chord` with its bass note in range.

    For inversion i the chord tones are stacked upward from tone i, each
    note the smallest pitch above the previous one.
    """
    tones = chord_tones(chord)
    lo, hi = bass_range
    out: list[Voicing] = []
    for inv in range(len(tones)):
        order = tones[inv:] + tones[:inv]
        for bass in range(lo, hi + 1):
            if bass % 12 != order[0]:
                continue
            notes = [bass]
            for pc in order[1:]:
                nxt = notes[-1] + ((pc - notes[-1]) % 12 or 12)
                notes.append(nxt)
            out.append(Voicing(tuple(notes), inv))
    if not out:
        raise ConfigError(f"no voicings of {chord.name} with bass in {bass_range}")
    return out


def strummed_voicing(
    prev: Voicing, chord: Chord, candidates: list[Voicing] | None = None
) -> Voicing:
    """The candidate voicing of `chord` least dissimilar to `prev`.

    Ties break toward the lowest bass note, then the lowest inversion, so
    the choice is deterministic.
    """
    if candidates is None:
        candidates = voicing_candidates(chord)
    if not candidates:
        raise ConfigError(f"empty candidate set for {chord.name}")
    return min(candidates, key=lambda v: (dissimilarity(prev, v), v.bass, v.inversion))


def register_step(
    current_inversion: int,
    valence: float,
    rng: np.random.Generator,
    max_inversion: int,
) -> int:
    """One probabilistic register move: hold 0.6, else up with p=valence.

    Conditional on a change (mass 0.4), the inversion rises by one with
    probability `valence` and falls with 1 - valence.  A move blocked by
    the [0, max_inversion] range is a no-op.
    """
    u = rng.random()
    if u < 0.6:
        return current_inversion
    up = (u - 0.6) / 0.4 < valence
    nxt = current_inversion + (1 if up else -1)
    if nxt < 0 or nxt > max_inversion:
        return current_inversion
    return nxt


def bass_notes(
    chord: Chord, bar_onsets: list[Onset], rng: np.random.Generator
) -> list[tuple[Onset, int]]:
    """Root/fifth bass line for one bar of pattern onsets.

    Onsets on the first beat take the root with probability 0.9 (anchoring
    the chord); later onsets choose root or fifth 50/50.
    """
    tones = chord_tones(chord)
    root, fifth = tones[0], tones[2]
    out: list[tuple[Onset, int]] = []
    for onset in bar_onsets:
        p_root = 0.9 if onset.offset < 1.0 else 0.5
        pc = root if rng.random() < p_root else fifth
        out.append((onset, BASS_BASE + pc))
    return out


def plucked_notes(
    chord: Chord, arousal: float, roughness: float, rng: np.random.Generator
) -> list[tuple[Onset, int]]:
    """Texture line of uniform-random chord tones; silent at high arousal.

    Returns nothing when arousal >= 0.7.  Onset count follows the
    roughness density law on the eighth grid (downbeat fixed, the rest
    jittered); every chord tone is equiprobable.
    """
    if arousal >= PLUCKED_MAX_AROUSAL:
        return []
    tones = chord_tones(chord)
    offsets = grid_onsets(density_from_roughness(roughness), rng)
    out: list[tuple[Onset, int]] = []
    for off in offsets:
        pc = tones[int(rng.integers(len(tones)))]
        out.append((Onset(off, PLUCKED_NOTE_BEATS), PLUCKED_BASE + pc))
    return out


# ---------------------------------------------------------------------------
# Melody: Markov first half, composed motifs second half
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic pitch transition matrix over the melodic alphabet."""

    pitches: tuple[int, ...]
    rows: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        n = len(self.pitches)
        if len(self.rows) != n or any(len(r) != n for r in self.rows):
            raise ConfigError(f"transition matrix must be {n}x{n}")
        for i, row in enumerate(self.rows):
            total = sum(row)
            if abs(total - 1.0) > 1e-9:
                raise ConfigError(f"matrix row {i} sums to {total:.12g}, not 1")
            if any(p < 0 for p in row):
                raise ConfigError(f"matrix row {i} has a negative entry")

    def index_of(self, pitch: int) -> int:
        """Alphabet index of `pitch`, snapping to the nearest (lower on ties)."""
        diffs = [abs(p - pitch) for p in self.pitches]
        return diffs.index(min(diffs))


def matrix_for_valence(
    low: TransitionMatrix, high: TransitionMatrix, valence: float
) -> TransitionMatrix:
    """Low matrix at valence <= 0.5, high above."""
    return low if valence <= 0.5 else high


def melody_step(
    matrix: TransitionMatrix, prev_pitch: int, rng: np.random.Generator
) -> int:
    """One Markov step from `prev_pitch` (snapped into the alphabet)."""
    row = matrix.rows[matrix.index_of(prev_pitch)]
    idx = int(rng.choice(len(row), p=np.asarray(row)))
    return matrix.pitches[idx]


def melody_matrix_bar(
    valence: float,
    prev_pitch: int,
    low: TransitionMatrix,
    high: TransitionMatrix,
    roughness: float,
    rng: np.random.Generator,
) -> tuple[list[tuple[Onset, int]], int]:
    """One bar of matrix-driven melody; returns (events, last pitch).

    Onset count comes from the roughness density law; each note sustains
    to the next onset (or the bar line), so a roughness of 0 would give
    eight notes of equal length.
    """
    matrix = matrix_for_valence(low, high, valence)
    offsets = grid_onsets(density_from_roughness(roughness), rng)
    bounds = offsets[1:] + [4.0]
    events: list[tuple[Onset, int]] = []
    pitch = prev_pitch
    for off, end in zip(offsets, bounds):
        pitch = melody_step(matrix, pitch, rng)
        events.append((Onset(off, end - off), pitch))
    return events, pitch


def melody_first_half(
    valence: float,
    prev_pitch: int,
    low: TransitionMatrix,
    high: TransitionMatrix,
    roughness: float,
    rng: np.random.Generator,
) -> list[list[tuple[Onset, int]]]:
    """Four bars of matrix-driven melody at constant valence/roughness."""
    bars = []
    pitch = prev_pitch
    for _ in range(4):
        bar, pitch = melody_matrix_bar(valence, pitch, low, high, roughness, rng)
        bars.append(bar)
    return bars


@dataclass(frozen=True)
class MotifNote:
    offset: float  # beats from motif start, within [0, 16)
    pitch: int
    duration: float


@dataclass(frozen=True)
class Motif:
    """A composed 4-bar melodic motif, emitted verbatim."""

    motif_id: str
    notes: tuple[MotifNote, ...]

    MOTIF_BEATS = 16.0

    def __post_init__(self) -> None:
        offs = [n.offset for n in self.notes]
        if any(o2 < o1 for o1, o2 in zip(offs, offs[1:])):
            raise ConfigError(f"{self.motif_id}: notes must be sorted by offset")
        if any(o < 0 or o >= self.MOTIF_BEATS for o in offs):
            raise ConfigError(f"{self.motif_id}: offsets must lie within 16 beats")
        if any(n.duration <= 0 for n in self.notes):
            raise ConfigError(f"{self.motif_id}: durations must be positive")

    def bar_notes(self, bar_in_half: int) -> list[tuple[Onset, int]]:
        """One bar of the motif (0-3), offsets rebased to the bar start."""
        lo, hi = bar_in_half * 4.0, (bar_in_half + 1) * 4.0
        return [
            (Onset(n.offset - lo, n.duration), n.pitch)
            for n in self.notes
            if lo <= n.offset < hi
        ]


@dataclass(frozen=True)
class MotifBank:
    """Three equiprobable composed motifs per arousal region."""

    spec: RegionSpec
    motifs: dict[str, tuple[Motif, ...]]

    MOTIFS_PER_REGION = 3

    def __post_init__(self) -> None:
        for name in self.spec.names():
            got = len(self.motifs.get(name, ()))
            if got != self.MOTIFS_PER_REGION:
                raise ConfigError(
                    f"motif bank region {name!r} must hold exactly "
                    f"{self.MOTIFS_PER_REGION} motifs, got {got}"
                )


def melody_second_half(
    arousal: float, bank: MotifBank, rng: np.random.Generator
) -> Motif:
    """Uniformly select the region's motif for the back half of a section."""
    region = classify_region(arousal, bank.spec)
    motifs = bank.motifs[region]
    return motifs[int(rng.integers(len(motifs)))]
