"""Seeded, splittable random streams.

Every stochastic decision in the engine draws from a stream keyed by
(seed, stream id, bar index) on top of the counter-based Philox
generator.  Streams are mutually independent, so adding a new track (a
new stream id) never perturbs the output of existing tracks, and any
(seed, stream, bar) triple can be re-opened in isolation.

Stream ids, one per decision domain, in track order:

    0 harmony     chord sampling for the bar
    1 bass        pattern choice at section starts, then root/fifth draws
    2 strummed    pattern choice, then the register step
    3 plucked     onset jitter, then pitch draws
    4 melody      onset jitter + Markov steps (first half), motif choice
    5 percussion  pattern choice at section starts

Within one (stream, bar) the draw order is fixed by the renderer and
documented at each call site.
"""

from __future__ import annotations

import numpy as np

HARMONY = 0
BASS = 1
STRUMMED = 2
PLUCKED = 3
MELODY = 4
PERCUSSION = 5


def stream(seed: int, stream_id: int, bar: int) -> np.random.Generator:
    """Fresh generator for one decision stream of one bar."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(stream_id, bar))
    return np.random.Generator(np.random.Philox(ss))
