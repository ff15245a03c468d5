"""moodpop: deterministic emotion-steered retro-pop MIDI generation.

A rule-based engine maps points on the valence-arousal plane to tempo,
dynamics, harmony, voicing, rhythm and melody choices, renders them as
multi-track note events, and serializes to Standard MIDI Files or a
streaming wire format.  Includes batch stimulus generation and listener
rating analysis tooling.
"""

from .analysis import RatingsTable, analyze, format_report, normalize_rating
from .config import EngineConfig, default_config, load_config
from .emotion import (
    EmotionPoint,
    EmotionTrajectory,
    classify_region,
    roughness_for,
    tempo_for,
    velocity_for,
)
from .engine import (
    TRACKS,
    Engine,
    ExcerptSpec,
    NoteEvent,
    TempoEvent,
    TempoMap,
    excerpt_duration_seconds,
    generate_excerpt,
)
from .errors import ConfigError, DataError, SmfError
from .midi import read_smf, write_smf
from .stimuli import batch_jobs, stimulus_grid, write_batch

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "EmotionPoint",
    "EmotionTrajectory",
    "classify_region",
    "velocity_for",
    "tempo_for",
    "roughness_for",
    "EngineConfig",
    "load_config",
    "default_config",
    "TRACKS",
    "NoteEvent",
    "TempoEvent",
    "TempoMap",
    "Engine",
    "ExcerptSpec",
    "generate_excerpt",
    "excerpt_duration_seconds",
    "write_smf",
    "read_smf",
    "stimulus_grid",
    "batch_jobs",
    "write_batch",
    "RatingsTable",
    "analyze",
    "format_report",
    "normalize_rating",
    "ConfigError",
    "DataError",
    "SmfError",
]
