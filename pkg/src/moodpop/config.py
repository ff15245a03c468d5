"""Load and validate engine configuration from YAML.

The config file carries every musician-editable table: the banded chord
graph, the AABB section template, melody transition matrices and motif
banks, rhythm pattern banks, and the scalar law constants.  Loading is
strict; any structural problem raises ConfigError with enough context to
fix the file.
"""
from __future__ import annotations

import functools
import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

from .emotion import Region, RegionSpec
from .errors import ConfigError
from .harmony import Chord, ChordGraph, SectionTemplate, validate_graph
from .performers import Motif, MotifBank, MotifNote, TransitionMatrix
from .rhythm import Onset, PatternBank, RhythmPattern

TONIC_PCS = {"C": 0, "C#": 1, "Db": 1, "D": 2, "D#": 3, "Eb": 3, "E": 4, "F": 5,
             "F#": 6, "Gb": 6, "G": 7, "G#": 8, "Ab": 8, "A": 9, "A#": 10,
             "Bb": 10, "B": 11}

TRACK_NAMES = ("percussion", "bass", "strummed_gtr", "plucked_gtr", "violins", "french_horn")


@dataclass(frozen=True)
class EngineConfig:
    """Everything the engine needs beyond the seed and emotion inputs."""

    tonic: str
    tonic_pc: int
    mode: str
    tempo_min: float
    tempo_max: float
    roughness_floor: float
    strum_bass_range: tuple[int, int]
    strum_anchor: tuple[int, ...]
    graph: ChordGraph
    template: SectionTemplate
    melody_start_pitch: int
    melody_low: TransitionMatrix
    melody_high: TransitionMatrix
    motif_bank: MotifBank
    bass_bank: PatternBank
    strummed_bank: PatternBank
    percussion_bank: PatternBank
    percussion_voices: dict[str, int]
    programs: dict[str, int]
    channels: dict[str, int]
    # fingerprint of the source tables; restored engine state must match
    digest: str


def _need(mapping: dict, key: str, where: str) -> Any:
    if not isinstance(mapping, dict) or key not in mapping:
        raise ConfigError(f"missing '{key}' in {where}")
    return mapping[key]


def _region_spec(raw: Any, where: str) -> RegionSpec:
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{where}: expected a non-empty list of regions")
    regions = []
    for item in raw:
        name = _need(item, "name", where)
        upto = float(_need(item, "upto", where))
        inclusive = bool(_need(item, "inclusive", where))
        regions.append(Region(name=str(name), upto=upto, inclusive=inclusive))
    try:
        return RegionSpec(regions=tuple(regions))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _pattern(raw: dict, where: str, voices: dict[str, int] | None) -> tuple[RhythmPattern, float]:
    pid = str(_need(raw, "id", where))
    length = int(_need(raw, "length_bars", where))
    prob = float(_need(raw, "p", where))
    onsets = []
    for entry in _need(raw, "onsets", where):
        if voices is None:
            if len(entry) != 3:
                raise ConfigError(f"{where}/{pid}: onset needs [offset, duration, accent]")
            off, dur, accent = entry
            voice = None
        else:
            if len(entry) != 4:
                raise ConfigError(f"{where}/{pid}: onset needs [offset, duration, accent, voice]")
            off, dur, accent, voice = entry
            if voice not in voices:
                raise ConfigError(f"{where}/{pid}: unknown percussion voice {voice!r}")
        onsets.append(Onset(offset=float(off), duration=float(dur), accent=bool(accent), voice=voice))
    try:
        return RhythmPattern(pattern_id=pid, length_bars=length, onsets=tuple(onsets)), prob
    except ValueError as exc:
        raise ConfigError(f"{where}/{pid}: {exc}") from exc


def _bank(raw: dict, instrument: str, voices: dict[str, int] | None = None) -> PatternBank:
    where = f"patterns/{instrument}"
    spec = _region_spec(_need(raw, "regions_spec", where), f"{where}/regions_spec")
    regions_raw = _need(raw, "regions", where)
    regions = {}
    for name, entries in regions_raw.items():
        regions[name] = tuple(_pattern(e, f"{where}/{name}", voices) for e in entries)
    try:
        return PatternBank(instrument=instrument, spec=spec, regions=regions)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _matrix(alphabet: list[int], rows: list[list[int]], where: str) -> TransitionMatrix:
    if len(rows) != len(alphabet):
        raise ConfigError(f"{where}: expected {len(alphabet)} rows, got {len(rows)}")
    norm = []
    for i, row in enumerate(rows):
        if len(row) != len(alphabet):
            raise ConfigError(f"{where}: row {i} has {len(row)} entries")
        total = float(sum(row))
        if total <= 0:
            raise ConfigError(f"{where}: row {i} has no positive weight")
        norm.append(tuple(w / total for w in row))
    try:
        return TransitionMatrix(pitches=tuple(alphabet), rows=tuple(norm))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _motif_bank(raw: dict, where: str) -> MotifBank:
    spec = _region_spec(_need(raw, "motif_regions", where), f"{where}/motif_regions")
    motifs = {}
    for region, entries in _need(raw, "motifs", where).items():
        built = []
        for entry in entries:
            mid = str(_need(entry, "id", f"{where}/motifs/{region}"))
            notes = tuple(
                MotifNote(offset=float(o), pitch=int(p), duration=float(d))
                for o, p, d in _need(entry, "notes", f"{where}/motifs/{region}/{mid}")
            )
            try:
                built.append(Motif(motif_id=mid, notes=notes))
            except ValueError as exc:
                raise ConfigError(f"{where}/motifs/{region}/{mid}: {exc}") from exc
        motifs[region] = tuple(built)
    try:
        return MotifBank(spec=spec, motifs=motifs)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _graph(raw: dict) -> ChordGraph:
    vertices = {}
    for item in _need(raw, "vertices", "chords"):
        name = str(_need(item, "name", "chords/vertices"))
        if name in vertices:
            raise ConfigError(f"chords/vertices: duplicate chord name {name!r}")
        try:
            vertices[name] = Chord(
                name=name,
                root=int(_need(item, "root", f"chords/vertices/{name}")),
                quality=str(_need(item, "quality", f"chords/vertices/{name}")),
                function=str(_need(item, "function", f"chords/vertices/{name}")),
            )
        except ValueError as exc:
            raise ConfigError(f"chords/vertices/{name}: {exc}") from exc
    edges_raw = _need(raw, "edges", "chords")
    edges = {}
    for band in ("low", "high"):
        band_raw = _need(edges_raw, band, "chords/edges")
        edges[band] = {
            frm: tuple((str(t), float(p)) for t, p in row)
            for frm, row in band_raw.items()
        }
    graph = ChordGraph(vertices=vertices, edges=edges,
                       band_split=float(raw.get("band_split", 0.5)))
    problems = validate_graph(graph)
    if problems:
        raise ConfigError("chord graph invalid:\n  " + "\n  ".join(problems))
    return graph


def parse_config(raw: dict) -> EngineConfig:
    """Build a validated EngineConfig from already-parsed YAML data."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    version = raw.get("schema_version")
    if version != 1:
        raise ConfigError(f"unsupported schema_version {version!r} (expected 1)")

    key = _need(raw, "key", "config")
    tonic = str(_need(key, "tonic", "key"))
    if tonic not in TONIC_PCS:
        raise ConfigError(f"key/tonic: unknown tonic {tonic!r}")
    mode = str(_need(key, "mode", "key"))
    if mode not in ("major",):
        raise ConfigError(f"key/mode: only 'major' is supported, got {mode!r}")

    tempo = _need(raw, "tempo", "config")
    tempo_min = float(_need(tempo, "min_bpm", "tempo"))
    tempo_max = float(_need(tempo, "max_bpm", "tempo"))
    if not 0 < tempo_min < tempo_max:
        raise ConfigError(f"tempo: need 0 < min_bpm < max_bpm, got {tempo_min}..{tempo_max}")

    floor = float(_need(raw, "roughness_floor", "config"))
    if not 0 <= floor <= 1:
        raise ConfigError(f"roughness_floor must lie in [0, 1], got {floor}")

    strum = _need(raw, "strum", "config")
    lo, hi = (int(v) for v in _need(strum, "bass_range", "strum"))
    if not 0 <= lo <= hi <= 127:
        raise ConfigError(f"strum/bass_range: bad range [{lo}, {hi}]")
    anchor = tuple(int(v) for v in _need(strum, "anchor", "strum"))
    if list(anchor) != sorted(anchor) or not anchor:
        raise ConfigError("strum/anchor must be a non-empty ascending pitch list")

    graph = _graph(_need(raw, "chords", "config"))

    template_raw = _need(raw, "template", "config")
    try:
        template = SectionTemplate.from_sections(
            a=tuple(str(x) for x in _need(template_raw, "a", "template")),
            b=tuple(str(x) for x in _need(template_raw, "b", "template")),
        )
    except ValueError as exc:
        raise ConfigError(f"template: {exc}") from exc
    known_labels = {c.function for c in graph.vertices.values()}
    missing = sorted(set(template.labels) - known_labels)
    if missing:
        raise ConfigError(f"template uses labels with no chord vertex: {missing}")

    melody = _need(raw, "melody", "config")
    alphabet = [int(p) for p in _need(melody, "alphabet", "melody")]
    weights = _need(melody, "matrix_weights", "melody")
    melody_low = _matrix(alphabet, _need(weights, "low", "melody/matrix_weights"),
                         "melody/matrix_weights/low")
    melody_high = _matrix(alphabet, _need(weights, "high", "melody/matrix_weights"),
                          "melody/matrix_weights/high")
    start_pitch = int(_need(melody, "start_pitch", "melody"))
    if start_pitch not in alphabet:
        raise ConfigError(f"melody/start_pitch {start_pitch} is not in the alphabet")
    motif_bank = _motif_bank(melody, "melody")

    voices_raw = _need(raw, "percussion_voices", "config")
    voices = {str(k): int(v) for k, v in voices_raw.items()}
    for name, note in voices.items():
        if not 0 <= note <= 127:
            raise ConfigError(f"percussion_voices/{name}: note {note} out of MIDI range")

    patterns = _need(raw, "patterns", "config")
    bass_bank = _bank(_need(patterns, "bass", "patterns"), "bass")
    strummed_bank = _bank(_need(patterns, "strummed", "patterns"), "strummed")
    percussion_bank = _bank(_need(patterns, "percussion", "patterns"), "percussion", voices)

    midi = _need(raw, "midi", "config")
    programs = {str(k): int(v) for k, v in _need(midi, "programs", "midi").items()}
    channels = {str(k): int(v) for k, v in _need(midi, "channels", "midi").items()}
    for name in TRACK_NAMES:
        if name not in channels:
            raise ConfigError(f"midi/channels: missing track {name!r}")
    for name in TRACK_NAMES:
        if name != "percussion" and name not in programs:
            raise ConfigError(f"midi/programs: missing track {name!r}")
    for name, ch in channels.items():
        if not 0 <= ch <= 15:
            raise ConfigError(f"midi/channels/{name}: channel {ch} out of range")

    return EngineConfig(
        tonic=tonic,
        tonic_pc=TONIC_PCS[tonic],
        mode=mode,
        tempo_min=tempo_min,
        tempo_max=tempo_max,
        roughness_floor=floor,
        strum_bass_range=(lo, hi),
        strum_anchor=anchor,
        graph=graph,
        template=template,
        melody_start_pitch=start_pitch,
        melody_low=melody_low,
        melody_high=melody_high,
        motif_bank=motif_bank,
        bass_bank=bass_bank,
        strummed_bank=strummed_bank,
        percussion_bank=percussion_bank,
        percussion_voices=voices,
        programs=programs,
        channels=channels,
        digest=hashlib.sha256(
            json.dumps(raw, sort_keys=True, separators=(",", ":")).encode()
        ).hexdigest()[:16],
    )


def load_config(path: str | Path | None = None) -> EngineConfig:
    """Load a config file, or the packaged default when path is None."""
    if path is None:
        text = resources.files("moodpop.data").joinpath("default_config.yaml").read_text()
        source = "<default>"
    else:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        text = p.read_text()
        source = str(p)
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{source}: not valid YAML: {exc}") from exc
    try:
        return parse_config(raw)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


@functools.lru_cache(maxsize=1)
def default_config() -> EngineConfig:
    return load_config(None)
