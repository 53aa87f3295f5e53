"""The full analysis pipeline on one stratified table.

Composes the geometric confounding assessment, per-measure GLM estimates
with likelihood-ratio inference, effect-modification classification, and
collapsibility analysis into a single deterministic report with a stable
JSON form.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping

from . import glm
from .errors import GlmError, ValidationError
from .geometry import (Containment, ConfoundingRectangle, RiskPoint,
                       StandardPopulation, StandardizedHull, association_points,
                       confounding_rectangle, contains, standard_population,
                       standardized_hull, standardized_point)
from .measures import (CollapsibilityReport, EffectModification, Measure,
                       collapse_analysis, effect_modification, is_collapsible)
from .tables import StratifiedCohortTable

MEASURE_LINKS = {
    Measure.ODDS_RATIO: "logit",
    Measure.RISK_RATIO: "log",
    Measure.RISK_DIFFERENCE: "identity",
    Measure.HAZARD_RATIO: "cloglog",
}

OFF_SEGMENT = "off_segment"
ON_SEGMENT = "on_segment"
INDETERMINATE = "indeterminate"

CONFOUNDING_NOTE = (
    "Classification compares observed proportions; sampling variation can "
    "move the crude point on or off the standardized segment or hull, so "
    "this equivalence with confounding is only approximate in practice.")


@dataclass(frozen=True, slots=True)
class MeasureAnalysis:
    """Crude, stratum-specific, and adjusted estimates for one measure."""

    measure: Measure
    link: str
    crude_estimate: float = math.nan
    crude_interval: glm.LrInterval | None = None
    crude_p_value: float = math.nan
    stratum_estimates: tuple[float, ...] = ()
    common_estimate: float = math.nan
    common_interval: glm.LrInterval | None = None
    interaction_p_value: float = math.nan
    modification: EffectModification | None = None
    error: str | None = None


@dataclass(frozen=True, slots=True)
class AnalysisReport:
    """Everything `analyze` knows about one table.

    ``confounding_flag`` is off_segment when the crude point falls outside
    the standardized segment or hull; with more than two strata an
    interior crude point is reported as indeterminate because confounding
    can leave the crude point inside the hull.
    """

    table: StratifiedCohortTable
    crude_point: RiskPoint
    stratum_points: tuple[RiskPoint, ...]
    standardized_points: tuple[tuple[str, RiskPoint], ...]
    hull: StandardizedHull
    rectangle: ConfoundingRectangle
    crude_containment: Containment
    confounding_flag: str
    confounding_note: str
    measures: tuple[MeasureAnalysis, ...]
    collapsibility: tuple[tuple[Measure, CollapsibilityReport | None, str | None], ...]

    def to_json_dict(self) -> dict:
        return _report_json(self)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True,
                          allow_nan=False)


def _measure_analysis(measure: Measure, table: StratifiedCohortTable,
                      crude_table: StratifiedCohortTable,
                      stratum_points: tuple[RiskPoint, ...],
                      level: float, em_tol: float) -> MeasureAnalysis:
    link = MEASURE_LINKS[measure]
    try:
        crude_spec = glm.ModelSpec(link=link, terms="exposure_only",
                                   table=crude_table)
        crude_fit = glm.fit(crude_spec)
        crude_estimate = glm.exposure_estimate(crude_fit)
        crude_interval = glm.profile_interval(crude_spec, level=level)
        crude_p = glm.exposure_test(crude_spec).p_value

        if table.k < 2:
            return MeasureAnalysis(
                measure=measure, link=link, crude_estimate=crude_estimate,
                crude_interval=crude_interval, crude_p_value=crude_p,
                stratum_estimates=(crude_estimate,),
                common_estimate=crude_estimate,
                common_interval=crude_interval)

        saturated = glm.fit(glm.ModelSpec(
            link=link, terms="saturated_with_interaction", table=table))
        stratum_estimates = glm.stratum_exposure_estimates(saturated)
        common_spec = glm.ModelSpec(link=link, terms="exposure_plus_stratum",
                                    table=table)
        common_fit = glm.fit(common_spec)
        common_estimate = glm.exposure_estimate(common_fit)
        common_interval = glm.profile_interval(common_spec, level=level)
        interaction_p = glm.interaction_test(table, link).p_value
        modification = effect_modification(measure, stratum_points, tol=em_tol)
        return MeasureAnalysis(
            measure=measure, link=link, crude_estimate=crude_estimate,
            crude_interval=crude_interval, crude_p_value=crude_p,
            stratum_estimates=stratum_estimates,
            common_estimate=common_estimate, common_interval=common_interval,
            interaction_p_value=interaction_p, modification=modification)
    except GlmError as exc:
        return MeasureAnalysis(measure=measure, link=link,
                               error=f"{type(exc).__name__}: {exc}")


def _collapsibility_entry(measure: Measure, table: StratifiedCohortTable,
                          ) -> tuple[Measure, CollapsibilityReport | None, str | None]:
    """Collapsibility along the fitted no-interaction stratum points."""
    link = MEASURE_LINKS[measure]
    try:
        fit = glm.fit(glm.ModelSpec(link=link, terms="exposure_plus_stratum",
                                    table=table))
        points = glm.fitted_stratum_points(fit)
        return measure, collapse_analysis(measure, points), None
    except GlmError as exc:
        return measure, None, f"{type(exc).__name__}: {exc}"


def collapsibility_entries(table: StratifiedCohortTable,
                           ) -> tuple[tuple[Measure, CollapsibilityReport | None, str | None], ...]:
    if table.k >= 2:
        return tuple(_collapsibility_entry(m, table) for m in Measure)
    return tuple((m, None, "needs at least two strata") for m in Measure)


def collapsibility_report_json(table: StratifiedCohortTable) -> list[dict]:
    """The collapsibility section of the analysis report, on its own."""
    return [_collapsibility_json(m, rep, err)
            for m, rep, err in collapsibility_entries(table)]


def analyze(table: StratifiedCohortTable, *,
            level: float = glm.DEFAULT_LEVEL,
            containment_tol: float = 1e-9,
            em_tol: float = 1e-6,
            custom_standards: Mapping[str, StandardPopulation] | None = None,
            ) -> AnalysisReport:
    """Run the whole pipeline on one table.

    Per-measure GLM failures are recorded in that measure's entry instead
    of aborting; geometry always succeeds on a valid table.
    """
    crude_point, stratum_points = association_points(table)
    hull = standardized_hull(stratum_points)
    rectangle = confounding_rectangle(stratum_points)
    containment = contains(hull, crude_point, tol=containment_tol)

    if containment is Containment.OUTSIDE:
        flag = OFF_SEGMENT
    elif table.k > 2:
        # An interior or boundary crude point is a standardized point, but
        # with more than two strata that does not rule confounding out.
        flag = INDETERMINATE
    else:
        flag = ON_SEGMENT

    standardized: list[tuple[str, RiskPoint]] = []
    for preset in ("study_sample", "exposed", "unexposed"):
        std = standard_population(table, preset)
        standardized.append((preset, standardized_point(table, std)))
    for name, std in (custom_standards or {}).items():
        if std.k != table.k:
            raise ValidationError(
                f"custom standard {name!r} has {std.k} weights for "
                f"{table.k} strata")
        standardized.append((name, standardized_point(table, std)))

    crude_table = StratifiedCohortTable(
        strata=(("all", table.collapse()),),
        exposure_label=table.exposure_label,
        outcome_label=table.outcome_label,
        covariate_label=table.covariate_label)

    measures = tuple(
        _measure_analysis(m, table, crude_table, stratum_points, level, em_tol)
        for m in Measure)
    collapsibility = collapsibility_entries(table)

    return AnalysisReport(
        table=table, crude_point=crude_point, stratum_points=stratum_points,
        standardized_points=tuple(standardized), hull=hull,
        rectangle=rectangle, crude_containment=containment,
        confounding_flag=flag, confounding_note=CONFOUNDING_NOTE,
        measures=measures, collapsibility=collapsibility)


def _sig6(value: float):
    if isinstance(value, bool):
        return value
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return float(f"{value:.6g}")


def _full(value: float):
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def number_pair(d: dict, key: str, value: float) -> None:
    d[key] = _sig6(value)
    d[key + "_full"] = _full(value)


def number_list_pair(d: dict, key: str, values) -> None:
    d[key] = [_sig6(v) for v in values]
    d[key + "_full"] = [_full(v) for v in values]


def point_json(p: RiskPoint) -> dict:
    out: dict = {"tag": p.tag}
    number_pair(out, "x", p.x)
    number_pair(out, "y", p.y)
    return out


def _interval_json(interval: glm.LrInterval | None) -> dict | None:
    if interval is None:
        return None
    out: dict = {"level": interval.level}
    number_pair(out, "estimate", interval.estimate)
    number_pair(out, "lower", interval.lower)
    number_pair(out, "upper", interval.upper)
    return out


def _measure_json(entry: MeasureAnalysis) -> dict:
    out: dict = {
        "measure": entry.measure.value,
        "short": entry.measure.short_name,
        "link": entry.link,
        "error": entry.error,
    }
    if entry.error is not None:
        return out
    number_pair(out, "crude_estimate", entry.crude_estimate)
    out["crude_interval"] = _interval_json(entry.crude_interval)
    number_pair(out, "crude_p_value", entry.crude_p_value)
    number_list_pair(out, "stratum_estimates", entry.stratum_estimates)
    number_pair(out, "common_estimate", entry.common_estimate)
    out["common_interval"] = _interval_json(entry.common_interval)
    number_pair(out, "interaction_p_value", entry.interaction_p_value)
    if entry.modification is not None:
        em: dict = {"present": entry.modification.present,
                    "tol": entry.modification.tol}
        number_list_pair(em, "stratum_values", entry.modification.stratum_values)
        number_pair(em, "max_difference", entry.modification.max_difference)
        out["effect_modification"] = em
    else:
        out["effect_modification"] = None
    return out


def _collapsibility_json(measure: Measure, report: CollapsibilityReport | None,
                         error: str | None) -> dict:
    out: dict = {
        "measure": measure.value,
        "short": measure.short_name,
        "measure_is_collapsible": is_collapsible(measure),
        "error": error,
    }
    if report is None:
        return out
    out["collapsible_here"] = report.collapsible_here
    number_pair(out, "stratum_value", report.stratum_value)
    number_list_pair(out, "stratum_values", report.stratum_values)
    number_pair(out, "min_value", report.min_value)
    number_pair(out, "max_value", report.max_value)
    number_list_pair(out, "argmin_weights", report.argmin_weights.as_floats())
    number_list_pair(out, "argmax_weights", report.argmax_weights.as_floats())
    return out


def _report_json(report: AnalysisReport) -> dict:
    points = {
        "crude": point_json(report.crude_point),
        "strata": [
            {"label": label, **point_json(p)}
            for label, p in zip(report.table.labels, report.stratum_points)
        ],
        "standardized": {
            name: point_json(p) for name, p in report.standardized_points
        },
        "hull_vertices": [point_json(p) for p in report.hull.vertices],
    }
    rect: dict = {}
    number_pair(rect, "x_min", report.rectangle.x_min)
    number_pair(rect, "x_max", report.rectangle.x_max)
    number_pair(rect, "y_min", report.rectangle.y_min)
    number_pair(rect, "y_max", report.rectangle.y_max)
    points["rectangle"] = rect
    return {
        "labels": {
            "exposure": report.table.exposure_label,
            "outcome": report.table.outcome_label,
            "covariate": report.table.covariate_label,
        },
        "points": points,
        "confounding": {
            "flag": report.confounding_flag,
            "crude_containment": report.crude_containment.value,
            "note": report.confounding_note,
        },
        "measures": [_measure_json(entry) for entry in report.measures],
        "collapsibility": [
            _collapsibility_json(m, rep, err)
            for m, rep, err in report.collapsibility
        ],
    }
