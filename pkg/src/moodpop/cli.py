"""Command-line front door: generate, batch-stimuli, analyze, validate-config, serve.

Exit codes: 0 ok, 2 usage error, 3 data/config error, 4 I/O error.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .analysis import RatingsTable, analyze, format_report
from .config import default_config, load_config
from .emotion import EmotionTrajectory, clamp01
from .engine import (
    VALID_BAR_COUNTS,
    ExcerptSpec,
    excerpt_duration_seconds,
    generate_excerpt,
)
from .errors import ConfigError, DataError
from .midi import write_smf
from .rhythm import percussion_density_ordering
from .stimuli import validate_grid, write_batch

EXIT_DATA = 3
EXIT_IO = 4


def _load(config_path: str | None):
    return load_config(config_path) if config_path else default_config()


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
def main() -> None:
    """Deterministic emotion-steered retro-pop MIDI generator."""


@main.command()
@click.option("--valence", type=float, default=None,
              help="Constant valence in [0,1] (clamped).")
@click.option("--arousal", type=float, default=None,
              help="Constant arousal in [0,1] (clamped).")
@click.option("--trajectory", "trajectory_path",
              type=click.Path(exists=True, dir_okay=False),
              help="JSON trajectory file (overrides --valence/--arousal).")
@click.option("--bars", type=int, default=32, show_default=True,
              help=f"Excerpt length; one of {list(VALID_BAR_COUNTS)}.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True,
              help="Output .mid path.")
@click.option("--config", "config_path", type=click.Path(dir_okay=False),
              help="Engine config YAML (default: built-in).")
def generate(valence, arousal, trajectory_path, bars, seed, out_path, config_path):
    """Render one excerpt to a Standard MIDI File."""
    if trajectory_path is not None:
        if valence is not None or arousal is not None:
            raise click.UsageError("--trajectory conflicts with --valence/--arousal")
        try:
            data = json.loads(Path(trajectory_path).read_text())
            trajectory = EmotionTrajectory.from_json(data)
        except OSError as exc:
            _fail(EXIT_IO, f"cannot read trajectory: {exc}")
        except (ValueError, json.JSONDecodeError) as exc:
            _fail(EXIT_DATA, f"bad trajectory file: {exc}")
    else:
        val = 0.5 if valence is None else valence
        aro = 0.5 if arousal is None else arousal
        for name, raw in (("valence", val), ("arousal", aro)):
            if raw != clamp01(raw):
                click.echo(f"warning: {name} {raw} clamped to {clamp01(raw)}",
                           err=True)
        trajectory = EmotionTrajectory.constant(val, aro)
    try:
        spec = ExcerptSpec(bars=bars, trajectory=trajectory, seed=seed)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    try:
        config = _load(config_path)
    except ConfigError as exc:
        _fail(EXIT_DATA, str(exc))
    events, tempo_map = generate_excerpt(config, spec)
    try:
        Path(out_path).write_bytes(write_smf(events, tempo_map, config))
    except OSError as exc:
        _fail(EXIT_IO, f"cannot write {out_path}: {exc}")
    duration = excerpt_duration_seconds(bars, tempo_map)
    click.echo(f"wrote {out_path}: {bars} bars, {duration:.2f} s, seed {seed}")


@main.command("batch-stimuli")
@click.option("--seed", "base_seed", type=int, default=0, show_default=True,
              help="Base seed; each stimulus derives its own from it.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True,
              help="Output directory for the 39 files and manifest.csv.")
@click.option("--config", "config_path", type=click.Path(dir_okay=False))
def batch_stimuli(base_seed, out_dir, config_path):
    """Render the 13-point x 3-seed listening-study stimulus set."""
    try:
        config = _load(config_path)
    except ConfigError as exc:
        _fail(EXIT_DATA, str(exc))
    try:
        rows = write_batch(config, base_seed, out_dir)
    except OSError as exc:
        _fail(EXIT_IO, f"cannot write stimuli: {exc}")
    except ValueError as exc:
        _fail(EXIT_DATA, str(exc))
    mean = sum(float(r["duration_seconds"]) for r in rows) / len(rows)
    click.echo(f"wrote {len(rows)} stimuli to {out_dir} "
               f"(mean duration {mean:.1f} s, base seed {base_seed})")


@main.command("analyze")
@click.argument("ratings_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False),
              help="Write the report here instead of stdout.")
def analyze_cmd(ratings_csv, out_path):
    """Fit rated vs. target emotion from a ratings CSV; print a TSV report."""
    try:
        table = RatingsTable.from_csv(ratings_csv)
        report = analyze(table)
    except DataError as exc:
        _fail(EXIT_DATA, str(exc))
    except OSError as exc:
        _fail(EXIT_IO, f"cannot read {ratings_csv}: {exc}")
    text = format_report(report)
    if out_path:
        try:
            Path(out_path).write_text(text)
        except OSError as exc:
            _fail(EXIT_IO, f"cannot write {out_path}: {exc}")
        click.echo(f"wrote {out_path}")
    else:
        click.echo(text, nl=False)


@main.command("validate-config")
@click.option("--config", "config_path", type=click.Path(dir_okay=False),
              help="Config to check (default: the built-in).")
def validate_config(config_path):
    """Load a config file and run every structural validator against it."""
    try:
        config = _load(config_path)
    except ConfigError as exc:
        _fail(EXIT_DATA, str(exc))
    problems = validate_grid()
    problems += percussion_density_ordering(config.percussion_bank)
    if problems:
        for p in problems:
            click.echo(f"invalid: {p}", err=True)
        sys.exit(EXIT_DATA)
    click.echo(f"ok: config {config.digest} valid "
               f"({len(config.graph.vertices)} chords, key {config.tonic} {config.mode})")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True,
              envvar="MOODPOP_HOST")
@click.option("--port", type=int, default=8765, show_default=True,
              envvar="MOODPOP_PORT")
@click.option("--config", "config_path", type=click.Path(dir_okay=False))
def serve(host, port, config_path):
    """Run the live-steering HTTP/WebSocket service."""
    from .service import run

    try:
        run(host, port, config_path)
    except ConfigError as exc:
        _fail(EXIT_DATA, str(exc))


if __name__ == "__main__":
    main()
