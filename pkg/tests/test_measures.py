"""Measure values, contours, effect modification, collapsibility extremes.

The segment-extremes oracle is a dense grid scan written independently of
the golden-section search it validates: any value the optimizer reports is
an achieved value of the measure, so it can only fail to be extreme by
missing a better point, which the grid detects.
"""

import math
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from rothman.errors import UndefinedMeasureError, ValidationError
from rothman.geometry import (RiskPoint, association_points, standardize)
from rothman.measures import (CollapsibilityReport, Measure, collapse_analysis,
                              comparison_value, contour, effect_modification,
                              is_collapsible, measure_value)

ALL_MEASURES = tuple(Measure)

# Frozen crude and stratum measure values for the smoking cohort.
CRUDE_VALUES = {
    Measure.ODDS_RATIO: 0.6848,
    Measure.RISK_RATIO: 0.7601,
    Measure.RISK_DIFFERENCE: -0.0754,
    Measure.HAZARD_RATIO: 0.7235,
}
STRATUM_VALUES = {
    Measure.ODDS_RATIO: (1.6224, 1.0182),
    Measure.RISK_RATIO: (1.5091, 1.0026),
    Measure.RISK_DIFFERENCE: (0.0614, 0.0022),
    Measure.HAZARD_RATIO: (1.5632, 1.0080),
}

# Frozen fitted risk pairs of the shared-odds-ratio model and the extremes
# of the odds ratio over their standardized segment. Both endpoints sit on
# the contour OR = 1.5372 yet mixtures dip below it.
SHARED_OR_POINTS = ((0.12392936535820742, 0.17861551983475824),
                    (0.8456065910462496, 0.8938352638382419))
SHARED_OR_VALUE = 1.5372255590821482
SHARED_OR_MIN = 1.2287501055365777
SHARED_OR_ARGMIN = (0.4842980604478264, 0.5157019395521736)


def grid_extremes(m, a, b, n=20000):
    """Brute-force (min, max) of the measure over the segment a..b."""
    lo = math.inf
    hi = -math.inf
    for i in range(n + 1):
        t = i / n
        p = RiskPoint(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
        v = measure_value(m, p)
        if math.isnan(v):
            continue
        lo = min(lo, v)
        hi = max(hi, v)
    return lo, hi


class TestMeasureEnum:
    def test_short_names(self):
        assert [m.short_name for m in ALL_MEASURES] == ["OR", "RR", "RD", "HR"]

    def test_labels(self):
        assert Measure.ODDS_RATIO.label == "odds ratio"
        assert Measure.RISK_DIFFERENCE.label == "risk difference"

    def test_null_values(self):
        assert Measure.RISK_DIFFERENCE.null_value == 0.0
        for m in (Measure.ODDS_RATIO, Measure.RISK_RATIO, Measure.HAZARD_RATIO):
            assert m.null_value == 1.0

    def test_ratio_flags(self):
        assert not Measure.RISK_DIFFERENCE.is_ratio
        assert Measure.ODDS_RATIO.is_ratio


class TestMeasureValue:
    @pytest.mark.parametrize("m", ALL_MEASURES)
    def test_whickham_crude(self, whickham, m):
        crude, _ = association_points(whickham)
        assert measure_value(m, crude) == pytest.approx(
            CRUDE_VALUES[m], abs=5e-5)

    @pytest.mark.parametrize("m", ALL_MEASURES)
    def test_whickham_strata(self, whickham, m):
        _, strata = association_points(whickham)
        for p, expected in zip(strata, STRATUM_VALUES[m]):
            assert measure_value(m, p) == pytest.approx(expected, abs=5e-5)

    def test_exact_spot_values(self):
        p = RiskPoint(0.2, 0.4)
        assert measure_value(Measure.RISK_DIFFERENCE, p) == pytest.approx(0.2)
        assert measure_value(Measure.RISK_RATIO, p) == pytest.approx(2.0)
        # odds 2/3 over odds 1/4
        assert measure_value(Measure.ODDS_RATIO, p) == pytest.approx(8 / 3)
        assert measure_value(Measure.HAZARD_RATIO, p) == pytest.approx(
            math.log(0.6) / math.log(0.8))

    def test_undefined_corners(self):
        origin = RiskPoint(0.0, 0.0)
        one = RiskPoint(1.0, 1.0)
        for m in (Measure.ODDS_RATIO, Measure.RISK_RATIO, Measure.HAZARD_RATIO):
            assert math.isnan(measure_value(m, origin))
            assert not math.isnan(measure_value(m, RiskPoint(0.5, 0.5)))
        assert math.isnan(measure_value(Measure.ODDS_RATIO, one))
        assert math.isnan(measure_value(Measure.HAZARD_RATIO, one))
        assert measure_value(Measure.RISK_RATIO, one) == pytest.approx(1.0)
        assert measure_value(Measure.RISK_DIFFERENCE, origin) == 0.0

    def test_infinite_limits(self):
        assert measure_value(Measure.RISK_RATIO, RiskPoint(0.0, 0.5)) == math.inf
        assert measure_value(Measure.RISK_RATIO, RiskPoint(0.5, 0.0)) == 0.0
        assert measure_value(Measure.ODDS_RATIO, RiskPoint(0.5, 1.0)) == math.inf
        assert measure_value(Measure.ODDS_RATIO, RiskPoint(1.0, 0.5)) == 0.0
        assert measure_value(Measure.HAZARD_RATIO, RiskPoint(0.0, 0.5)) == math.inf
        assert measure_value(Measure.RISK_DIFFERENCE, RiskPoint(0.0, 1.0)) == 1.0


class TestComparisonValue:
    def test_risk_difference_is_identity(self):
        assert comparison_value(Measure.RISK_DIFFERENCE, -0.3) == -0.3

    def test_ratios_use_log_scale(self):
        assert comparison_value(Measure.RISK_RATIO, 2.0) == pytest.approx(
            math.log(2.0))
        assert comparison_value(Measure.ODDS_RATIO, 1.0) == 0.0
        assert comparison_value(Measure.HAZARD_RATIO, 0.0) == -math.inf
        assert comparison_value(Measure.RISK_RATIO, math.inf) == math.inf

    def test_nan_propagates(self):
        assert math.isnan(comparison_value(Measure.ODDS_RATIO, math.nan))


class TestContour:
    def test_algebraic_spot_values(self):
        assert contour(Measure.ODDS_RATIO, 2.0, 0.3) == pytest.approx(6 / 13)
        assert contour(Measure.RISK_RATIO, 0.5, 0.4) == pytest.approx(0.2)
        assert contour(Measure.RISK_DIFFERENCE, 0.25, 0.5) == pytest.approx(0.75)
        assert contour(Measure.HAZARD_RATIO, 2.0, 0.19) == pytest.approx(
            1.0 - 0.81 ** 2)

    @pytest.mark.parametrize("m", ALL_MEASURES)
    def test_null_contour_is_the_diagonal(self, m):
        for x in (0.0, 0.25, 0.5, 0.75, 1.0):
            assert contour(m, m.null_value, x) == pytest.approx(x, abs=1e-15)

    def test_out_of_square_returns_none(self):
        assert contour(Measure.RISK_DIFFERENCE, 0.5, 0.8) is None
        assert contour(Measure.RISK_DIFFERENCE, -0.3, 0.1) is None
        assert contour(Measure.RISK_RATIO, 2.0, 0.7) is None
        assert contour(Measure.ODDS_RATIO, -1.0, 0.5) is None
        assert contour(Measure.HAZARD_RATIO, -1.0, 0.5) is None

    def test_nan_value_returns_none(self):
        for m in ALL_MEASURES:
            assert contour(m, math.nan, 0.5) is None

    def test_x_outside_unit_interval_rejected(self):
        with pytest.raises(ValidationError):
            contour(Measure.RISK_RATIO, 1.0, 1.5)

    def test_zero_valued_contours(self):
        assert contour(Measure.ODDS_RATIO, 0.0, 0.3) == 0.0
        assert contour(Measure.RISK_RATIO, 0.0, 0.3) == 0.0
        assert contour(Measure.HAZARD_RATIO, 0.0, 0.3) == 0.0

    @given(st.floats(min_value=0.01, max_value=0.99),
           st.floats(min_value=0.01, max_value=0.99))
    @settings(max_examples=200)
    def test_contour_inverts_measure_value(self, x, y):
        p = RiskPoint(x, y)
        for m in ALL_MEASURES:
            v = measure_value(m, p)
            recovered = contour(m, v, x)
            assert recovered is not None
            assert recovered == pytest.approx(y, abs=1e-9)


class TestCollapsibleFlag:
    def test_straight_contour_measures(self):
        assert is_collapsible(Measure.RISK_RATIO)
        assert is_collapsible(Measure.RISK_DIFFERENCE)
        assert not is_collapsible(Measure.ODDS_RATIO)
        assert not is_collapsible(Measure.HAZARD_RATIO)

    @given(st.floats(min_value=0.05, max_value=0.95),
           st.floats(min_value=0.05, max_value=0.95),
           st.floats(min_value=0.05, max_value=0.95),
           st.floats(min_value=0.0, max_value=1.0))
    @settings(max_examples=100)
    def test_collapsible_measures_constant_on_contour_chords(self, x1, x2, v,
                                                             t):
        # any convex combination of two contour points stays on the contour
        for m in (Measure.RISK_RATIO, Measure.RISK_DIFFERENCE):
            value = v if m.is_ratio else v - 0.5
            y1 = contour(m, value, x1)
            y2 = contour(m, value, x2)
            if y1 is None or y2 is None:
                continue
            mid = RiskPoint(x1 + t * (x2 - x1), y1 + t * (y2 - y1))
            got = measure_value(m, mid)
            if math.isnan(got):
                continue
            assert got == pytest.approx(value, rel=1e-9, abs=1e-12)


class TestEffectModification:
    @pytest.mark.parametrize("m", ALL_MEASURES)
    def test_whickham_modification_present(self, whickham, m):
        _, strata = association_points(whickham)
        em = effect_modification(m, strata)
        assert em.present
        assert em.stratum_values == pytest.approx(STRATUM_VALUES[m], abs=5e-5)

    def test_whickham_risk_difference_spread(self, whickham):
        _, strata = association_points(whickham)
        em = effect_modification(Measure.RISK_DIFFERENCE, strata)
        assert em.max_difference == pytest.approx(0.05917447, abs=1e-8)

    def test_identical_strata_show_no_modification(self, identical_strata_table):
        _, strata = association_points(identical_strata_table)
        for m in ALL_MEASURES:
            em = effect_modification(m, strata)
            assert not em.present
            assert em.max_difference == 0.0

    def test_large_tolerance_suppresses_modification(self, whickham):
        _, strata = association_points(whickham)
        em = effect_modification(Measure.RISK_DIFFERENCE, strata, tol=1.0)
        assert not em.present
        assert em.tol == 1.0

    def test_undefined_value_names_the_stratum(self):
        strata = [RiskPoint(0.0, 0.0, tag="stratum:z"), RiskPoint(0.2, 0.3)]
        with pytest.raises(UndefinedMeasureError, match="stratum:z"):
            effect_modification(Measure.RISK_RATIO, strata)

    def test_needs_two_strata(self):
        with pytest.raises(ValidationError):
            effect_modification(Measure.RISK_RATIO, [RiskPoint(0.1, 0.2)])

    def test_negative_tolerance_rejected(self, whickham):
        _, strata = association_points(whickham)
        with pytest.raises(ValidationError):
            effect_modification(Measure.RISK_RATIO, strata, tol=-1.0)


class TestCollapseAnalysis:
    def test_whickham_extremes_sit_at_the_stratum_points(self, whickham):
        # measure values are monotone along this particular segment
        _, strata = association_points(whickham)
        for m in ALL_MEASURES:
            r = collapse_analysis(m, strata)
            young, old = STRATUM_VALUES[m]
            assert r.min_value == pytest.approx(old, abs=5e-5)
            assert r.max_value == pytest.approx(young, abs=5e-5)
            assert r.argmin_weights.as_floats() == pytest.approx((0.0, 1.0),
                                                                 abs=1e-9)
            assert r.argmax_weights.as_floats() == pytest.approx((1.0, 0.0),
                                                                 abs=1e-9)
            assert math.isnan(r.stratum_value)
            assert not r.collapsible_here

    def test_shared_odds_ratio_contour_dips_in_the_interior(self):
        pts = [RiskPoint(x, y) for x, y in SHARED_OR_POINTS]
        r = collapse_analysis(Measure.ODDS_RATIO, pts)
        assert r.stratum_value == pytest.approx(SHARED_OR_VALUE, abs=1e-12)
        assert r.max_value == pytest.approx(SHARED_OR_VALUE, abs=1e-12)
        assert r.min_value == pytest.approx(SHARED_OR_MIN, abs=1e-9)
        assert r.argmin_weights.as_floats() == pytest.approx(
            SHARED_OR_ARGMIN, abs=1e-6)
        assert not r.collapsible_here

    def test_shared_or_min_beats_the_grid(self):
        a, b = (RiskPoint(x, y) for x, y in SHARED_OR_POINTS)
        r = collapse_analysis(Measure.ODDS_RATIO, [a, b])
        lo, hi = grid_extremes(Measure.ODDS_RATIO, a, b)
        assert r.min_value <= lo + 1e-12
        assert r.max_value >= hi - 1e-12

    def test_risk_ratio_contour_points_collapse_exactly(self):
        pts = [RiskPoint(0.05, 0.1), RiskPoint(0.1, 0.2), RiskPoint(0.3, 0.6)]
        r = collapse_analysis(Measure.RISK_RATIO, pts)
        assert r.stratum_value == pytest.approx(2.0, abs=1e-12)
        assert r.min_value == pytest.approx(2.0, abs=1e-9)
        assert r.max_value == pytest.approx(2.0, abs=1e-9)
        assert r.collapsible_here

    def test_risk_difference_contour_points_collapse_exactly(self):
        pts = [RiskPoint(0.1, 0.3), RiskPoint(0.5, 0.7)]
        r = collapse_analysis(Measure.RISK_DIFFERENCE, pts)
        assert r.stratum_value == pytest.approx(0.2, abs=1e-12)
        assert r.max_value - r.min_value <= 1e-9
        assert r.collapsible_here

    def test_three_strata_hull_extremes_beat_interior_sampling(self):
        pts = [RiskPoint(0.1, 0.3), RiskPoint(0.5, 0.2), RiskPoint(0.7, 0.8)]
        for m in ALL_MEASURES:
            r = collapse_analysis(m, pts)
            lo = math.inf
            hi = -math.inf
            n = 60
            for i, j in product(range(n + 1), repeat=2):
                if i + j > n:
                    continue
                w = (i / n, j / n, (n - i - j) / n)
                p = standardize(pts, _std(w))
                v = measure_value(m, p)
                if math.isnan(v):
                    continue
                lo = min(lo, v)
                hi = max(hi, v)
            assert r.min_value <= lo + 1e-12
            assert r.max_value >= hi - 1e-12

    def test_needs_two_strata(self):
        with pytest.raises(ValidationError):
            collapse_analysis(Measure.ODDS_RATIO, [RiskPoint(0.1, 0.2)])

    def test_everywhere_undefined_measure_raises(self):
        pts = [RiskPoint(0.0, 0.0), RiskPoint(0.0, 0.0)]
        with pytest.raises(UndefinedMeasureError):
            collapse_analysis(Measure.RISK_RATIO, pts)

    def test_report_type(self, whickham):
        _, strata = association_points(whickham)
        assert isinstance(collapse_analysis(Measure.ODDS_RATIO, strata),
                          CollapsibilityReport)


def _std(weights):
    from rothman.geometry import StandardPopulation
    return StandardPopulation(weights=weights)


interior = st.floats(min_value=0.02, max_value=0.98)


@given(interior, interior, interior, interior)
@settings(max_examples=60)
def test_segment_extremes_match_grid_oracle(ax, ay, bx, by):
    a = RiskPoint(ax, ay)
    b = RiskPoint(bx, by)
    for m in ALL_MEASURES:
        r = collapse_analysis(m, [a, b])
        lo, hi = grid_extremes(m, a, b, n=4000)
        # reported extremes are achieved values, so they can only improve
        # on the grid, never fall inside it
        assert r.min_value <= lo + 1e-12
        assert r.max_value >= hi - 1e-12
        assert r.min_value <= min(r.stratum_values) + 1e-12
        assert r.max_value >= max(r.stratum_values) - 1e-12
        got_min = measure_value(m, standardize([a, b], r.argmin_weights))
        got_max = measure_value(m, standardize([a, b], r.argmax_weights))
        assert got_min == pytest.approx(r.min_value, rel=1e-12, abs=1e-12)
        assert got_max == pytest.approx(r.max_value, rel=1e-12, abs=1e-12)
