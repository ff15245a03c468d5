"""Batch generation of the 13-point listening-study stimulus set.

The grid covers the unit valence-arousal square symmetrically: the four
corners, the four quadrant midpoints, the four edge midpoints and the
center.  Each point is rendered with three seeds (39 excerpts), with a
bar count chosen from the point's arousal so that fast excerpts get more
bars and the mean duration stays close to half a minute.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .config import EngineConfig
from .emotion import EmotionPoint, EmotionTrajectory
from .engine import ExcerptSpec, excerpt_duration_seconds, generate_excerpt
from .midi import write_smf

__all__ = [
    "GRID_POINTS",
    "REPS_PER_POINT",
    "stimulus_grid",
    "validate_grid",
    "bars_for_arousal",
    "StimulusJob",
    "batch_jobs",
    "write_batch",
    "MANIFEST_COLUMNS",
]

GRID_POINTS: tuple[tuple[float, float], ...] = (
    (0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0),          # corners
    (0.25, 0.25), (0.25, 0.75), (0.75, 0.25), (0.75, 0.75),  # quadrant mids
    (0.5, 0.0), (0.5, 1.0), (0.0, 0.5), (1.0, 0.5),          # edge mids
    (0.5, 0.5),                                              # neutral center
)
REPS_PER_POINT = 3
SEED_POINT_STRIDE = 1000

MANIFEST_COLUMNS = ("stimulus_id", "point_index", "valence", "arousal",
                    "seed", "bars", "duration_seconds", "file")


def stimulus_grid() -> list[EmotionPoint]:
    return [EmotionPoint(v, a) for v, a in GRID_POINTS]


def validate_grid(points: list[EmotionPoint] | None = None) -> list[str]:
    """Check the grid shape invariants; empty result means valid."""
    pts = points if points is not None else stimulus_grid()
    problems: list[str] = []
    if len(pts) != 13:
        problems.append(f"grid must have 13 points, got {len(pts)}")
    coords = {(p.valence, p.arousal) for p in pts}
    if len(coords) != len(pts):
        problems.append("grid points must be distinct")
    for v, a in coords:
        if not (0 <= v <= 1 and 0 <= a <= 1):
            problems.append(f"point ({v}, {a}) is outside the unit square")
        if (round(1 - v, 12), a) not in coords:
            problems.append(f"grid not symmetric under valence flip at ({v}, {a})")
        if (v, round(1 - a, 12)) not in coords:
            problems.append(f"grid not symmetric under arousal flip at ({v}, {a})")
    return problems


def bars_for_arousal(arousal: float) -> int:
    """Bar count per stimulus: slow points stay short, fast points run long.

    The thresholds put the batch's mean duration near the low thirties of
    seconds; only near-still excerpts get the minimal 4-bar form.
    """
    if arousal <= 0.1:
        return 4
    if arousal <= 0.45:
        return 8
    return 16


@dataclass(frozen=True)
class StimulusJob:
    stimulus_id: str
    point_index: int
    rep: int
    valence: float
    arousal: float
    seed: int
    bars: int


def batch_jobs(base_seed: int) -> list[StimulusJob]:
    """The deterministic 39-job plan for a base seed (point-major order)."""
    jobs: list[StimulusJob] = []
    for index, (valence, arousal) in enumerate(GRID_POINTS):
        for rep in range(REPS_PER_POINT):
            jobs.append(StimulusJob(
                stimulus_id=f"p{index:02d}_r{rep}",
                point_index=index,
                rep=rep,
                valence=valence,
                arousal=arousal,
                seed=base_seed + SEED_POINT_STRIDE * index + rep,
                bars=bars_for_arousal(arousal),
            ))
    return jobs


def write_batch(
    config: EngineConfig, base_seed: int, out_dir: str | Path
) -> list[dict]:
    """Render all 39 stimuli into out_dir and write manifest.csv.

    Returns the manifest rows (also useful for summaries); re-running with
    the same base seed reproduces every file and the manifest byte for byte.
    """
    problems = validate_grid()
    if problems:
        raise ValueError("stimulus grid is invalid: " + "; ".join(problems))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows: list[dict] = []
    for job in batch_jobs(base_seed):
        spec = ExcerptSpec(
            bars=job.bars,
            trajectory=EmotionTrajectory.constant(job.valence, job.arousal),
            seed=job.seed,
        )
        events, tempo_map = generate_excerpt(config, spec)
        filename = f"stim_{job.stimulus_id}.mid"
        (out / filename).write_bytes(write_smf(events, tempo_map, config))
        rows.append({
            "stimulus_id": job.stimulus_id,
            "point_index": job.point_index,
            "valence": f"{job.valence:.2f}",
            "arousal": f"{job.arousal:.2f}",
            "seed": job.seed,
            "bars": job.bars,
            "duration_seconds": f"{excerpt_duration_seconds(job.bars, tempo_map):.3f}",
            "file": filename,
        })
    with (out / "manifest.csv").open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=MANIFEST_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    return rows
