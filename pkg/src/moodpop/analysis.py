"""Listener-rating analysis: normalization, per-level OLS fits, mean tables.

Ratings come in on a 9-point scale and are normalized to [0, 1].  For
each dimension the per-target-level mean normalized rating is regressed
against the target value with ordinary least squares, reporting slope,
intercept, R-squared and the regression F-test p-value.  Output is
tabular text only.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

from scipy import special

from .errors import DataError

__all__ = [
    "normalize_rating",
    "denormalize_rating",
    "RatingRow",
    "RatingsTable",
    "FitResult",
    "PointSummary",
    "AnalysisReport",
    "linear_fit",
    "analyze",
    "format_report",
]

RATING_MIN = 1
RATING_MAX = 9

CSV_COLUMNS = ("participant_id", "stimulus_id", "target_valence",
               "target_arousal", "rated_valence", "rated_arousal")


def normalize_rating(raw: int, row: str | None = None) -> float:
    """Map a 1-9 rating onto [0, 1]: (raw - 1) / 8."""
    where = f" ({row})" if row else ""
    if not isinstance(raw, int) or isinstance(raw, bool):
        raise DataError(f"rating must be an integer, got {raw!r}{where}")
    if not RATING_MIN <= raw <= RATING_MAX:
        raise DataError(f"rating {raw} outside {RATING_MIN}-{RATING_MAX}{where}")
    return (raw - RATING_MIN) / (RATING_MAX - RATING_MIN)


def denormalize_rating(value: float) -> int:
    """Inverse of normalize_rating on its exact outputs."""
    raw = round(value * (RATING_MAX - RATING_MIN) + RATING_MIN)
    if not RATING_MIN <= raw <= RATING_MAX:
        raise DataError(f"normalized value {value} maps outside the scale")
    return raw


@dataclass(frozen=True)
class RatingRow:
    participant_id: str
    stimulus_id: str
    target_valence: float
    target_arousal: float
    rated_valence: int
    rated_arousal: int


@dataclass(frozen=True)
class RatingsTable:
    rows: tuple[RatingRow, ...]

    @classmethod
    def from_csv(cls, path: str | Path) -> "RatingsTable":
        p = Path(path)
        with p.open(newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            missing = [c for c in CSV_COLUMNS if c not in header]
            if missing:
                raise DataError(f"{p.name}: missing columns {missing}")
            rows = []
            for i, rec in enumerate(reader, start=2):  # 1-based, after header
                where = f"{p.name} row {i}"
                try:
                    tv = float(rec["target_valence"])
                    ta = float(rec["target_arousal"])
                except ValueError as exc:
                    raise DataError(f"{where}: bad target value: {exc}") from exc
                rows.append(RatingRow(
                    participant_id=rec["participant_id"],
                    stimulus_id=rec["stimulus_id"],
                    target_valence=tv,
                    target_arousal=ta,
                    rated_valence=_parse_rating(rec["rated_valence"], where),
                    rated_arousal=_parse_rating(rec["rated_arousal"], where),
                ))
        if not rows:
            raise DataError(f"{p.name}: no data rows")
        return cls(tuple(rows))


def _parse_rating(text: str, where: str) -> int:
    try:
        value = int(text)
    except (TypeError, ValueError) as exc:
        raise DataError(f"{where}: rating {text!r} is not an integer") from exc
    normalize_rating(value, where)  # range check with row context
    return value


@dataclass(frozen=True)
class FitResult:
    """One OLS fit of per-level mean rating against target level."""

    slope: float
    intercept: float
    r_squared: float
    f_statistic: float
    p_value: float
    n_levels: int


def linear_fit(xs: list[float], ys: list[float]) -> FitResult:
    """Hand-computed simple OLS with the regression F-test.

    Degenerate inputs follow the usual conventions: a flat response gives
    slope 0 and R-squared 0; a perfect fit gives p = 0.
    """
    n = len(xs)
    if n != len(ys) or n < 3:
        raise DataError(f"regression needs at least 3 points, got {n}")
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    sxx = sum((x - mean_x) ** 2 for x in xs)
    sxy = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    if sxx == 0:
        raise DataError("regression needs at least 2 distinct x values")
    slope = sxy / sxx
    intercept = mean_y - slope * mean_x
    ss_tot = sum((y - mean_y) ** 2 for y in ys)
    ss_res = sum((y - (intercept + slope * x)) ** 2 for x, y in zip(xs, ys))
    df_res = n - 2
    if ss_tot == 0.0:
        # flat response: nothing to explain
        r_squared, f_stat, p_value = 0.0, 0.0, 1.0
    elif ss_res <= 0.0:
        # perfect fit: all variance explained
        r_squared, f_stat, p_value = 1.0, math.inf, 0.0
    else:
        r_squared = 1.0 - ss_res / ss_tot
        f_stat = (ss_tot - ss_res) / (ss_res / df_res)
        p_value = float(special.fdtrc(1.0, float(df_res), f_stat))
    return FitResult(slope=slope, intercept=intercept, r_squared=r_squared,
                     f_statistic=f_stat, p_value=p_value, n_levels=n)


@dataclass(frozen=True)
class PointSummary:
    """Per-target-point normalized rating means with standard errors."""

    target_valence: float
    target_arousal: float
    n: int
    mean_valence: float
    se_valence: float
    mean_arousal: float
    se_arousal: float


@dataclass(frozen=True)
class AnalysisReport:
    valence: FitResult
    arousal: FitResult
    points: tuple[PointSummary, ...]


def _mean_se(values: list[float]) -> tuple[float, float]:
    n = len(values)
    mean = sum(values) / n
    if n < 2:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)


def _level_fit(table: RatingsTable, target_of, rating_of) -> FitResult:
    levels: dict[float, list[float]] = {}
    for row in table.rows:
        levels.setdefault(target_of(row), []).append(
            normalize_rating(rating_of(row)))
    if len(levels) < 3:
        raise DataError(
            f"analysis needs at least 3 distinct target levels, got {len(levels)}")
    xs = sorted(levels)
    ys = [sum(levels[x]) / len(levels[x]) for x in xs]
    return linear_fit(xs, ys)


def analyze(table: RatingsTable) -> AnalysisReport:
    """Both dimension fits plus the per-point mean table."""
    valence = _level_fit(table, lambda r: r.target_valence,
                         lambda r: r.rated_valence)
    arousal = _level_fit(table, lambda r: r.target_arousal,
                         lambda r: r.rated_arousal)
    groups: dict[tuple[float, float], list[RatingRow]] = {}
    for row in table.rows:
        groups.setdefault((row.target_valence, row.target_arousal), []).append(row)
    points = []
    for (tv, ta) in sorted(groups):
        rows = groups[(tv, ta)]
        mv, sv = _mean_se([normalize_rating(r.rated_valence) for r in rows])
        ma, sa = _mean_se([normalize_rating(r.rated_arousal) for r in rows])
        points.append(PointSummary(
            target_valence=tv, target_arousal=ta, n=len(rows),
            mean_valence=mv, se_valence=sv, mean_arousal=ma, se_arousal=sa))
    return AnalysisReport(valence=valence, arousal=arousal,
                          points=tuple(points))


def format_report(report: AnalysisReport) -> str:
    """Stable tab-separated rendering of an analysis report."""
    lines = ["dimension\tslope\tintercept\tr_squared\tf_statistic\tp_value\tn_levels"]
    for name, fit in (("valence", report.valence), ("arousal", report.arousal)):
        lines.append(
            f"{name}\t{fit.slope:.9f}\t{fit.intercept:.9f}\t{fit.r_squared:.9f}"
            f"\t{fit.f_statistic:.9g}\t{fit.p_value:.9g}\t{fit.n_levels}")
    lines.append("")
    lines.append("target_valence\ttarget_arousal\tn\tmean_valence\tse_valence"
                 "\tmean_arousal\tse_arousal")
    for p in report.points:
        lines.append(
            f"{p.target_valence:g}\t{p.target_arousal:g}\t{p.n}"
            f"\t{p.mean_valence:.9f}\t{p.se_valence:.9f}"
            f"\t{p.mean_arousal:.9f}\t{p.se_arousal:.9f}")
    return "\n".join(lines) + "\n"
