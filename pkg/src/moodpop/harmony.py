"""Chord vocabulary, the valence-banded progression graph, and the AABB form.

The progression machinery is a directed probabilistic graph over chords.
Each vertex is a concrete chord; outgoing edges carry transition
probabilities and exist separately for a low- and a high-valence band.
A 32-bar AABB template pins the *function* (I, vi, IV, ...) of every bar;
the graph decides which concrete chord realizes it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = [
    "QUALITY_INTERVALS",
    "Chord",
    "ChordGraph",
    "SectionTemplate",
    "chord_tones",
    "validate_graph",
    "next_chord",
    "progression_for",
]

# Interval stacks above the root, by chord quality.
QUALITY_INTERVALS: dict[str, tuple[int, ...]] = {
    "major": (0, 4, 7),
    "minor": (0, 3, 7),
    "dominant7": (0, 4, 7, 10),
    "minor7": (0, 3, 7, 10),
    "major7": (0, 4, 7, 11),
    "diminished": (0, 3, 6),
}


@dataclass(frozen=True)
class Chord:
    """A pitch-class chord with a scale-degree function label."""

    name: str
    root: int  # pitch class 0-11
    quality: str
    function: str  # e.g. "I", "ii", "vi"

    def __post_init__(self) -> None:
        if not 0 <= self.root <= 11:
            raise ConfigError(f"chord {self.name}: root {self.root} not a pitch class")
        if self.quality not in QUALITY_INTERVALS:
            raise ConfigError(f"chord {self.name}: unknown quality {self.quality!r}")


def chord_tones(chord: Chord) -> tuple[int, ...]:
    """Pitch classes of the chord, ordered root, third, fifth (, seventh)."""
    return tuple((chord.root + iv) % 12 for iv in QUALITY_INTERVALS[chord.quality])


@dataclass(frozen=True)
class ChordGraph:
    """Directed probabilistic chord graph with valence-banded edges.

    edges[band][from_name] is a list of (to_name, probability).  The band
    for a valence level splits at `band_split` (low at or below, high
    above), mirroring the melody-matrix split.
    """

    vertices: dict[str, Chord]
    edges: dict[str, dict[str, list[tuple[str, float]]]]
    band_split: float = 0.5

    def band_for(self, valence: float) -> str:
        return "low" if valence <= self.band_split else "high"

    def chord(self, name: str) -> Chord:
        try:
            return self.vertices[name]
        except KeyError:
            raise KeyError(f"chord {name!r} is not a graph vertex") from None

    def out_edges(self, band: str, from_name: str) -> list[tuple[str, float]]:
        return self.edges.get(band, {}).get(from_name, [])

    def names_with_function(self, function: str) -> list[str]:
        return [n for n, c in self.vertices.items() if c.function == function]


def validate_graph(graph: ChordGraph) -> list[str]:
    """All invariant violations of the graph (empty list means valid).

    Checks: edge rows sum to 1 +- 1e-9, edge targets/sources are vertices,
    probabilities are non-negative, and within each band every vertex with
    edges can reach every other such vertex (no dead ends).
    """
    violations: list[str] = []
    for band, rows in graph.edges.items():
        for from_name, row in rows.items():
            if from_name not in graph.vertices:
                violations.append(f"{band}: edge source {from_name!r} is not a vertex")
                continue
            total = 0.0
            for to_name, p in row:
                if to_name not in graph.vertices:
                    violations.append(
                        f"{band}: {from_name} -> {to_name!r} targets a non-vertex"
                    )
                if p < 0.0:
                    violations.append(
                        f"{band}: {from_name} -> {to_name} has negative probability {p}"
                    )
                total += p
            if abs(total - 1.0) > 1e-9:
                violations.append(
                    f"{band}: edges out of {from_name} sum to {total:.12g}, not 1"
                )
        # Strong connectivity over the vertices that participate in this band.
        participants = set(rows)
        for row in rows.values():
            participants.update(t for t, _ in row)
        for start in sorted(participants):
            seen = {start}
            frontier = [start]
            while frontier:
                node = frontier.pop()
                for to_name, p in rows.get(node, []):
                    if p > 0.0 and to_name not in seen:
                        seen.add(to_name)
                        frontier.append(to_name)
            missing = participants - seen
            if missing:
                violations.append(
                    f"{band}: {sorted(missing)} unreachable from {start} (dead end)"
                )
                break  # one witness per band is enough
    return violations


def next_chord(
    graph: ChordGraph,
    current: Chord,
    valence: float,
    rng: np.random.Generator,
    function: str | None = None,
) -> Chord:
    """Sample the successor of `current` under the valence band's edges.

    With `function` given (the arranger's case), candidates are restricted
    to edges whose target carries that function label and the remaining
    probabilities are renormalized.
    """
    if current.name not in graph.vertices:
        raise ValueError(f"chord {current.name!r} is not a graph vertex")
    band = graph.band_for(valence)
    row = graph.out_edges(band, current.name)
    if function is not None:
        row = [(t, p) for t, p in row if graph.vertices[t].function == function]
    if not row:
        raise ConfigError(
            f"no {band}-band edge from {current.name}"
            + (f" to function {function}" if function else "")
        )
    targets = [t for t, _ in row]
    weights = np.array([p for _, p in row], dtype=float)
    weights /= weights.sum()
    idx = int(rng.choice(len(targets), p=weights))
    return graph.vertices[targets[idx]]


@dataclass(frozen=True)
class SectionTemplate:
    """The 32-bar AABB form: 8-bar sections A and B, each played twice.

    `labels` holds one chord function per bar slot; construction from the
    two 8-bar sections guarantees the repeats are identical.
    """

    labels: tuple[str, ...]

    SECTION_BARS = 8
    TOTAL_BARS = 32

    def __post_init__(self) -> None:
        if len(self.labels) != self.TOTAL_BARS:
            raise ConfigError(f"template must have 32 bars, got {len(self.labels)}")
        if self.labels[0:8] != self.labels[8:16] or self.labels[16:24] != self.labels[24:32]:
            raise ConfigError("template is not AABB (section repeats differ)")

    @classmethod
    def from_sections(cls, a: list[str], b: list[str]) -> "SectionTemplate":
        if len(a) != cls.SECTION_BARS or len(b) != cls.SECTION_BARS:
            raise ConfigError("sections A and B must be 8 bars each")
        return cls(tuple(a) * 2 + tuple(b) * 2)

    def label(self, bar: int) -> str:
        """Function label for a bar; the form loops every 32 bars."""
        return self.labels[bar % self.TOTAL_BARS]


def progression_for(
    template: SectionTemplate,
    valences: list[float],
    graph: ChordGraph,
    rng: np.random.Generator,
    start: Chord | None = None,
) -> list[Chord]:
    """One chord per bar for `valences`, walking the graph under the template.

    Bar i is sampled under valences[i], restricted to the function label of
    template slot i.  The walk starts from `start` (default: the first
    major chord labelled I, i.e. the tonic).
    """
    bars = len(valences)
    if bars not in (4, 8, 16, 32):
        raise ValueError(f"bar count must be one of 4/8/16/32, got {bars}")
    current = start if start is not None else tonic_chord(graph)
    out: list[Chord] = []
    for i, val in enumerate(valences):
        current = next_chord(graph, current, val, rng, function=template.label(i))
        out.append(current)
    return out


def tonic_chord(graph: ChordGraph) -> Chord:
    """The progression's anchor: the major-quality vertex labelled I."""
    for chord in graph.vertices.values():
        if chord.function == "I" and chord.quality == "major":
            return chord
    for chord in graph.vertices.values():
        if chord.function == "I":
            return chord
    raise ConfigError("graph has no chord with function I")
