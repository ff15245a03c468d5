"""Emotion input model and the scalar emotion-to-music parameter laws.

Everything here is a pure function of a (valence, arousal) pair in the
unit square.  Out-of-range inputs are clamped rather than rejected: the
live-steering path must be total.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError

__all__ = [
    "EmotionPoint",
    "EmotionTrajectory",
    "Region",
    "RegionSpec",
    "clamp01",
    "round_half_up",
    "velocity_for",
    "tempo_for",
    "roughness_for",
    "classify_region",
    "TEMPO_MIN_BPM",
    "TEMPO_MAX_BPM",
    "ROUGHNESS_FLOOR",
]

TEMPO_MIN_BPM = 36.0
TEMPO_MAX_BPM = 130.0
ROUGHNESS_FLOOR = 0.2


def clamp01(x: float) -> float:
    """Clamp to [0, 1]; NaN collapses to 0.0 so no NaN ever enters the engine."""
    if math.isnan(x):
        return 0.0
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else float(x)


def round_half_up(x: float) -> int:
    # round() is banker's rounding; musical parameter laws use half-up.
    return math.floor(x + 0.5)


@dataclass(frozen=True)
class EmotionPoint:
    """A point on the valence-arousal plane, clamped to the unit square."""

    valence: float = 0.5
    arousal: float = 0.5

    def __post_init__(self) -> None:
        object.__setattr__(self, "valence", clamp01(self.valence))
        object.__setattr__(self, "arousal", clamp01(self.arousal))


@dataclass(frozen=True)
class EmotionTrajectory:
    """Bar-indexed emotion schedule: entries (bar_index, EmotionPoint).

    Bar indices must be strictly increasing and start at bar 0; the point
    at any bar is the most recent entry at or before it.
    """

    entries: tuple[tuple[int, EmotionPoint], ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("trajectory needs at least one entry")
        if self.entries[0][0] != 0:
            raise ValueError("trajectory must start at bar 0")
        bars = [b for b, _ in self.entries]
        if any(b2 <= b1 for b1, b2 in zip(bars, bars[1:])):
            raise ValueError("trajectory bar indices must be strictly increasing")
        if any(b < 0 for b in bars):
            raise ValueError("trajectory bar indices must be non-negative")

    @classmethod
    def constant(cls, valence: float, arousal: float) -> "EmotionTrajectory":
        return cls(((0, EmotionPoint(valence, arousal)),))

    @classmethod
    def from_points(cls, points: list[tuple[int, float, float]]) -> "EmotionTrajectory":
        return cls(tuple((int(b), EmotionPoint(v, a)) for b, v, a in points))

    def at_bar(self, bar: int) -> EmotionPoint:
        current = self.entries[0][1]
        for b, p in self.entries:
            if b > bar:
                break
            current = p
        return current

    @property
    def last_bar(self) -> int:
        return self.entries[-1][0]

    def to_json(self) -> dict:
        """The on-disk trajectory format (also produced by the steering UI)."""
        return {
            "points": [
                {"bar": b, "valence": p.valence, "arousal": p.arousal}
                for b, p in self.entries
            ]
        }

    @classmethod
    def from_json(cls, data: dict) -> "EmotionTrajectory":
        points = data.get("points") if isinstance(data, dict) else None
        if not isinstance(points, list) or not points:
            raise ValueError("trajectory file needs a non-empty 'points' list")
        entries = []
        for i, item in enumerate(points):
            try:
                entries.append((int(item["bar"]),
                                float(item["valence"]), float(item["arousal"])))
            except (TypeError, KeyError) as exc:
                raise ValueError(
                    f"trajectory point {i} needs bar/valence/arousal fields"
                ) from exc
        return cls.from_points(entries)


@dataclass(frozen=True)
class Region:
    """One region of a RegionSpec: values up to `upto`.

    `inclusive` says whether `upto` itself belongs to this region.  The
    lower edge is implied by the previous region's upper edge.
    """

    name: str
    upto: float
    inclusive: bool


@dataclass(frozen=True)
class RegionSpec:
    """An exact partition of [0, 1] into named, ordered regions.

    Represented by upper boundaries with per-boundary inclusivity, so a
    gap or overlap is impossible to express; validation rejects the
    remaining malformed shapes (non-increasing boundaries, last != 1).
    """

    regions: tuple[Region, ...]

    def __post_init__(self) -> None:
        if not self.regions:
            raise ConfigError("RegionSpec needs at least one region")
        uptos = [r.upto for r in self.regions]
        if any(b2 <= b1 for b1, b2 in zip(uptos, uptos[1:])):
            raise ConfigError(f"region boundaries must strictly increase, got {uptos}")
        if uptos[-1] != 1.0:
            raise ConfigError(f"last region must end at 1.0, got {uptos[-1]}")
        if uptos[0] <= 0.0:
            raise ConfigError("first region boundary must be positive")
        if not self.regions[-1].inclusive:
            raise ConfigError("the final region must include its upper edge (1.0)")

    @classmethod
    def from_list(cls, items: list[tuple[str, float, bool]]) -> "RegionSpec":
        return cls(tuple(Region(n, float(u), bool(i)) for n, u, i in items))

    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.regions)


def classify_region(value: float, spec: RegionSpec) -> str:
    """Name of the unique region of `spec` containing `value` (clamped)."""
    v = clamp01(value)
    for region in spec.regions:
        if v < region.upto or (v == region.upto and region.inclusive):
            return region.name
    return spec.regions[-1].name


def velocity_for(arousal: float) -> int:
    """MIDI attack velocity for an arousal level: 60 at rest up to 75.

    Rounded half-up to an integer since MIDI velocity is integral.
    """
    aro = clamp01(arousal)
    return round_half_up(60.0 + aro * 15.0)


def tempo_for(
    arousal: float,
    lo: float = TEMPO_MIN_BPM,
    hi: float = TEMPO_MAX_BPM,
) -> float:
    """Tempo in bpm, rising logarithmically with arousal from `lo` to `hi`.

    tempo(a) = lo + (hi - lo) * ln(1 + (e-1)*a), so the endpoints are
    exact and sensitivity is highest at low arousal, where tempo changes
    are most audible.
    """
    aro = clamp01(arousal)
    return lo + (hi - lo) * math.log(1.0 + (math.e - 1.0) * aro)


def roughness_for(arousal: float, floor: float = ROUGHNESS_FLOOR) -> float:
    """Rhythmic roughness: falls linearly as arousal rises, floored at `floor`.

    Roughness is a proxy for sparse, irregular rhythm; the floor keeps the
    densest bars from degenerating into a wall of notes.
    """
    aro = clamp01(arousal)
    return max(floor, 1.0 - aro)
