"""Rhythm patterns, arousal-region pattern banks, and roughness-to-density.

Meter is fixed at 4/4 with an 8-slot eighth-note grid per bar.  Patterns
are 1 bar (strummed guitar) or 8 bars (bass, percussion) long; banks
index them by arousal region with per-region selection probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .emotion import RegionSpec, classify_region, round_half_up
from .errors import ConfigError

__all__ = [
    "BEATS_PER_BAR",
    "GRID_SLOTS",
    "Onset",
    "RhythmPattern",
    "PatternBank",
    "select_pattern",
    "density_from_roughness",
    "grid_onsets",
    "percussion_density_ordering",
]

BEATS_PER_BAR = 4
GRID_SLOTS = 8  # eighth notes per bar
SLOT_BEATS = 0.5


@dataclass(frozen=True)
class Onset:
    """One onset within a pattern: beat offset from pattern start."""

    offset: float  # beats, dyadic
    duration: float  # beats, positive
    accent: bool = False
    voice: str | None = None  # percussion voice name, None for pitched tracks


@dataclass(frozen=True)
class RhythmPattern:
    """A 1- or 8-bar onset pattern."""

    pattern_id: str
    length_bars: int
    onsets: tuple[Onset, ...]

    def __post_init__(self) -> None:
        if self.length_bars not in (1, 8):
            raise ConfigError(f"{self.pattern_id}: pattern length must be 1 or 8 bars")
        span = self.length_bars * BEATS_PER_BAR
        offs = [o.offset for o in self.onsets]
        if any(o2 < o1 for o1, o2 in zip(offs, offs[1:])):
            raise ConfigError(f"{self.pattern_id}: onsets must be sorted by offset")
        if any(o < 0 or o >= span for o in offs):
            raise ConfigError(f"{self.pattern_id}: onset offsets must lie within {span} beats")
        if any(o.duration <= 0 for o in self.onsets):
            raise ConfigError(f"{self.pattern_id}: durations must be positive")

    def bar_onsets(self, bar_in_pattern: int) -> list[Onset]:
        """Onsets of one bar, offsets rebased to that bar's start."""
        b = bar_in_pattern % self.length_bars
        lo, hi = b * BEATS_PER_BAR, (b + 1) * BEATS_PER_BAR
        return [
            Onset(o.offset - lo, o.duration, o.accent, o.voice)
            for o in self.onsets
            if lo <= o.offset < hi
        ]

    def onsets_per_bar(self) -> float:
        return len(self.onsets) / self.length_bars


@dataclass(frozen=True)
class PatternBank:
    """Arousal-region-indexed patterns with selection probabilities."""

    instrument: str
    spec: RegionSpec
    regions: dict[str, tuple[tuple[RhythmPattern, float], ...]]

    def __post_init__(self) -> None:
        for name in self.spec.names():
            if name not in self.regions:
                raise ConfigError(f"{self.instrument}: no patterns for region {name!r}")
        for name, entries in self.regions.items():
            if not entries:
                raise ConfigError(f"{self.instrument}/{name}: empty region")
            total = sum(p for _, p in entries)
            if abs(total - 1.0) > 1e-9:
                raise ConfigError(
                    f"{self.instrument}/{name}: probabilities sum to {total:.12g}, not 1"
                )


def select_pattern(
    bank: PatternBank, arousal: float, rng: np.random.Generator
) -> RhythmPattern:
    """Sample a pattern from the bank region that `arousal` falls in."""
    region = classify_region(arousal, bank.spec)
    entries = bank.regions[region]
    if len(entries) == 1:
        return entries[0][0]
    weights = np.array([p for _, p in entries], dtype=float)
    weights /= weights.sum()
    idx = int(rng.choice(len(entries), p=weights))
    return entries[idx][0]


def density_from_roughness(roughness: float) -> int:
    """Onsets per bar implied by a roughness level: 8 at 0, down to 1.

    count = round(8 * (1 - roughness)), clamped to [1, 8].
    """
    count = round_half_up(GRID_SLOTS * (1.0 - roughness))
    return max(1, min(GRID_SLOTS, count))


def grid_onsets(count: int, rng: np.random.Generator) -> list[float]:
    """Place `count` onsets on the bar's eighth grid, in beats.

    The downbeat is always occupied; the remaining onsets are drawn
    uniformly (without replacement) from the free grid slots, using the
    bar's RNG stream so placement is deterministic per seed.
    """
    count = max(1, min(GRID_SLOTS, count))
    slots = [0]
    if count > 1:
        extra = rng.choice(GRID_SLOTS - 1, size=count - 1, replace=False)
        slots.extend(int(s) + 1 for s in extra)
    slots.sort()
    return [s * SLOT_BEATS for s in slots]


def percussion_density_ordering(bank: PatternBank) -> list[str]:
    """Violations of the density ordering low <= moderate <= min(high).

    Percussion is authored to thin out as arousal falls; this check keeps
    replacement banks honest.  Empty result means the ordering holds.
    """
    means = {
        name: [p.onsets_per_bar() for p, _ in entries]
        for name, entries in bank.regions.items()
    }
    violations: list[str] = []
    order = [n for n in ("low", "moderate", "high") if n in means]
    for lo_name, hi_name in zip(order, order[1:]):
        lo = max(means[lo_name])
        hi = min(means[hi_name])
        if lo > hi:
            violations.append(
                f"{bank.instrument}: {lo_name} density {lo:.2f}/bar exceeds "
                f"{hi_name} minimum {hi:.2f}/bar"
            )
    return violations
