"""Ratings normalization and the OLS analysis, cross-checked against scipy."""

import math

import pytest
from scipy import stats

from moodpop.analysis import (
    AnalysisReport,
    RatingRow,
    RatingsTable,
    analyze,
    denormalize_rating,
    format_report,
    linear_fit,
    normalize_rating,
)
from moodpop.errors import DataError


class TestNormalization:
    def test_all_nine_values_exact(self):
        for raw in range(1, 10):
            assert normalize_rating(raw) == (raw - 1) / 8

    def test_endpoints_and_midpoint(self):
        assert normalize_rating(1) == 0.0
        assert normalize_rating(9) == 1.0
        assert normalize_rating(5) == 0.5

    def test_affine_and_monotone(self):
        values = [normalize_rating(r) for r in range(1, 10)]
        steps = [b - a for a, b in zip(values, values[1:])]
        assert all(s == steps[0] for s in steps)
        assert steps[0] > 0

    def test_inverts_denormalize(self):
        for raw in range(1, 10):
            assert denormalize_rating(normalize_rating(raw)) == raw

    def test_out_of_range(self):
        with pytest.raises(DataError):
            normalize_rating(0)
        with pytest.raises(DataError):
            normalize_rating(10)

    def test_non_integer(self):
        with pytest.raises(DataError):
            normalize_rating(2.5)
        with pytest.raises(DataError):
            normalize_rating(True)

    def test_error_names_the_row(self):
        with pytest.raises(DataError, match="row 17"):
            normalize_rating(12, row="ratings.csv row 17")


# -- regression fixtures: (xs, ys) with varied noise shapes ------------------

FIXTURES = [
    ([0.0, 0.25, 0.5, 0.75, 1.0], [0.12, 0.30, 0.55, 0.71, 0.93]),
    ([0.0, 0.5, 1.0], [0.9, 0.52, 0.11]),  # negative slope
    ([0.1, 0.2, 0.4, 0.5, 0.7, 0.9, 1.0],
     [0.35, 0.30, 0.52, 0.44, 0.60, 0.68, 0.75]),
]


class TestLinearFit:
    @pytest.mark.parametrize("xs,ys", FIXTURES)
    def test_matches_scipy_linregress(self, xs, ys):
        """Slope, intercept, R-squared and p within 1e-9 of the reference."""
        fit = linear_fit(xs, ys)
        ref = stats.linregress(xs, ys)
        assert fit.slope == pytest.approx(ref.slope, abs=1e-9)
        assert fit.intercept == pytest.approx(ref.intercept, abs=1e-9)
        assert fit.r_squared == pytest.approx(ref.rvalue ** 2, abs=1e-9)
        # the regression F equals the squared t of the slope test, so the
        # two-sided t p-value is the F p-value
        assert fit.p_value == pytest.approx(ref.pvalue, abs=1e-9)

    def test_perfect_fit(self):
        fit = linear_fit([0.0, 0.5, 1.0], [0.0, 0.5, 1.0])
        assert fit.slope == pytest.approx(1.0)
        assert fit.intercept == pytest.approx(0.0, abs=1e-15)
        assert fit.r_squared == 1.0
        assert math.isinf(fit.f_statistic)
        assert fit.p_value == 0.0

    def test_flat_response(self):
        fit = linear_fit([0.0, 0.5, 1.0], [0.4, 0.4, 0.4])
        assert fit.slope == 0.0
        assert fit.r_squared == 0.0
        assert fit.f_statistic == 0.0
        assert fit.p_value == 1.0

    def test_needs_three_points(self):
        with pytest.raises(DataError):
            linear_fit([0.0, 1.0], [0.0, 1.0])

    def test_needs_distinct_x(self):
        with pytest.raises(DataError):
            linear_fit([0.5, 0.5, 0.5], [0.1, 0.2, 0.3])


def _table(rows):
    return RatingsTable(tuple(RatingRow(*r) for r in rows))


def _synthetic_table():
    """Ratings tracking targets with a fixed participant offset pattern."""
    rows = []
    offsets = {"p1": 0, "p2": 1, "p3": -1}
    for pid, off in offsets.items():
        for tv, ta in [(0.0, 0.0), (0.0, 1.0), (0.5, 0.5), (1.0, 0.0),
                       (1.0, 1.0), (0.25, 0.75), (0.75, 0.25)]:
            rv = max(1, min(9, round(1 + tv * 8) + off))
            ra = max(1, min(9, round(1 + ta * 8) - off))
            rows.append((pid, f"s_{tv}_{ta}", tv, ta, rv, ra))
    return _table(rows)


class TestAnalyze:
    def test_fits_match_levelwise_linregress(self):
        """analyze() regresses per-level mean normalized ratings on the
        target level; scipy on the same aggregation must agree."""
        table = _synthetic_table()
        report = analyze(table)
        for target_of, rating_of, fit in [
            (lambda r: r.target_valence, lambda r: r.rated_valence,
             report.valence),
            (lambda r: r.target_arousal, lambda r: r.rated_arousal,
             report.arousal),
        ]:
            levels = {}
            for row in table.rows:
                levels.setdefault(target_of(row), []).append(
                    normalize_rating(rating_of(row)))
            xs = sorted(levels)
            ys = [sum(levels[x]) / len(levels[x]) for x in xs]
            ref = stats.linregress(xs, ys)
            assert fit.slope == pytest.approx(ref.slope, abs=1e-9)
            assert fit.intercept == pytest.approx(ref.intercept, abs=1e-9)
            assert fit.r_squared == pytest.approx(ref.rvalue ** 2, abs=1e-9)
            assert fit.n_levels == len(xs)

    def test_point_summaries(self):
        report = analyze(_synthetic_table())
        points = {(p.target_valence, p.target_arousal): p
                  for p in report.points}
        assert len(points) == 7
        center = points[(0.5, 0.5)]
        assert center.n == 3
        # participants rate 5, 6, 4 -> normalized mean 0.5
        assert center.mean_valence == pytest.approx(0.5)
        assert center.se_valence > 0

    def test_too_few_levels(self):
        rows = [("p1", "s1", 0.0, 0.0, 1, 1), ("p1", "s2", 1.0, 1.0, 9, 9),
                ("p1", "s3", 0.0, 1.0, 1, 9)]
        with pytest.raises(DataError, match="3 distinct target levels"):
            analyze(_table(rows))


class TestCsv:
    GOOD = (
        "participant_id,stimulus_id,target_valence,target_arousal,"
        "rated_valence,rated_arousal\n"
        "p1,s1,0.0,0.5,2,7\n"
        "p2,s1,0.0,0.5,3,6\n"
    )

    def test_reads_good_file(self, tmp_path):
        p = tmp_path / "r.csv"
        p.write_text(self.GOOD)
        table = RatingsTable.from_csv(p)
        assert len(table.rows) == 2
        assert table.rows[0] == RatingRow("p1", "s1", 0.0, 0.5, 2, 7)

    def test_missing_column(self, tmp_path):
        p = tmp_path / "r.csv"
        p.write_text("participant_id,stimulus_id\np1,s1\n")
        with pytest.raises(DataError, match="missing columns"):
            RatingsTable.from_csv(p)

    def test_bad_rating_names_row(self, tmp_path):
        p = tmp_path / "r.csv"
        p.write_text(self.GOOD.replace("3,6", "11,6"))
        with pytest.raises(DataError, match="row 3"):
            RatingsTable.from_csv(p)

    def test_non_numeric_rating(self, tmp_path):
        p = tmp_path / "r.csv"
        p.write_text(self.GOOD.replace("2,7", "x,7"))
        with pytest.raises(DataError, match="not an integer"):
            RatingsTable.from_csv(p)

    def test_empty_table(self, tmp_path):
        p = tmp_path / "r.csv"
        p.write_text(self.GOOD.splitlines()[0] + "\n")
        with pytest.raises(DataError, match="no data rows"):
            RatingsTable.from_csv(p)


class TestReport:
    def test_bit_stable(self):
        a = format_report(analyze(_synthetic_table()))
        b = format_report(analyze(_synthetic_table()))
        assert a == b

    def test_layout(self):
        text = format_report(analyze(_synthetic_table()))
        lines = text.splitlines()
        assert lines[0].startswith("dimension\tslope\tintercept")
        assert lines[1].startswith("valence\t")
        assert lines[2].startswith("arousal\t")
        assert any(line.startswith("target_valence\t") for line in lines)
        # one data row per grid point plus headers and spacer
        assert len([l for l in lines if l and not l[0].isalpha()]) == 7

    def test_report_is_tabular_not_graphical(self):
        text = format_report(analyze(_synthetic_table()))
        assert "\t" in text
        for line in text.splitlines():
            assert not line.startswith(("#", "plot", "figure"))
