"""Planar geometry of the unit square of risks.

The x-axis carries the risk of the outcome in the unexposed and the y-axis
the risk in the exposed, so every population corresponds to a point in
[0, 1]^2 and standardization is a convex combination of stratum points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

from .errors import ValidationError
from .tables import StratifiedCohortTable

PRESETS = ("study_sample", "exposed", "unexposed")

WEIGHT_SUM_TOL = 1e-12
DEFAULT_CONTAINMENT_TOL = 1e-9


@dataclass(frozen=True, slots=True)
class RiskPoint:
    """A point (risk in unexposed, risk in exposed) with a provenance tag.

    Tags follow the convention ``crude``, ``stratum:<label>``,
    ``standardized:<preset>``, ``causal:<label>``.
    """

    x: float
    y: float
    tag: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        if not (0.0 <= self.x <= 1.0) or not (0.0 <= self.y <= 1.0):
            raise ValidationError(
                f"risk point ({self.x}, {self.y}) outside the unit square")

    @property
    def coords(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True, slots=True)
class StandardPopulation:
    """A stratum distribution: nonnegative weights summing to one.

    Weights may be exact ``Fraction`` values (preset populations derived
    from a table are) or floats; arithmetic preserves whatever is given.
    """

    weights: tuple
    preset: str = "custom"

    def __post_init__(self) -> None:
        ws = tuple(self.weights)
        object.__setattr__(self, "weights", ws)
        if not ws:
            raise ValidationError("weights must be non-empty")
        if any(w < 0 for w in ws):
            raise ValidationError(f"weights must be nonnegative: {ws}")
        if abs(float(sum(ws)) - 1.0) > WEIGHT_SUM_TOL:
            raise ValidationError(
                f"weights must sum to 1 within {WEIGHT_SUM_TOL}: sum={float(sum(ws))!r}")

    @property
    def k(self) -> int:
        return len(self.weights)

    def as_floats(self) -> tuple[float, ...]:
        return tuple(float(w) for w in self.weights)


class Containment(Enum):
    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass(frozen=True, slots=True)
class StandardizedHull:
    """Convex hull of the stratum points, vertices in counterclockwise order.

    Collinear boundary points are not retained as vertices.
    ``vertex_source_indices[i]`` is the index into ``source_points`` of
    ``vertices[i]``.
    """

    vertices: tuple[RiskPoint, ...]
    source_points: tuple[RiskPoint, ...]
    vertex_source_indices: tuple[int, ...]


@dataclass(frozen=True, slots=True)
class ConfoundingRectangle:
    """Smallest axis-parallel rectangle containing the stratum points."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self) -> None:
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValidationError("degenerate rectangle with inverted bounds")

    @property
    def corners(self) -> tuple[tuple[float, float], ...]:
        return ((self.x_min, self.y_min), (self.x_max, self.y_min),
                (self.x_max, self.y_max), (self.x_min, self.y_max))

    def contains_point(self, p: RiskPoint, tol: float = 0.0) -> bool:
        return (self.x_min - tol <= p.x <= self.x_max + tol
                and self.y_min - tol <= p.y <= self.y_max + tol)


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull_indices(coords: Sequence[tuple]) -> list[int]:
    """Monotone-chain hull over any exact-comparable coordinates.

    Returns indices into ``coords`` in counterclockwise order, dropping
    collinear boundary points and duplicates. No epsilon is used:
    construction must be exact on rational inputs, so ties are decided by
    the raw comparisons.
    """
    order = sorted(range(len(coords)), key=lambda i: coords[i])
    deduped: list[int] = []
    for i in order:
        if not deduped or coords[i] != coords[deduped[-1]]:
            deduped.append(i)
    if len(deduped) <= 2:
        return deduped

    def chain(idx: list[int]) -> list[int]:
        out: list[int] = []
        for i in idx:
            while len(out) >= 2 and _cross(
                    coords[out[-2]], coords[out[-1]], coords[i]) <= 0:
                out.pop()
            out.append(i)
        return out

    lower = chain(deduped)
    upper = chain(deduped[::-1])
    return lower[:-1] + upper[:-1]


def association_points(table: StratifiedCohortTable,
                       ) -> tuple[RiskPoint, tuple[RiskPoint, ...]]:
    """Crude point from the collapsed counts plus one point per stratum."""
    crude_x, crude_y = table.collapse().risks()
    crude = RiskPoint(crude_x, crude_y, tag="crude")
    strata = []
    for label, cell in table.strata:
        if cell.has_zero_margin:
            raise ValidationError(
                f"stratum {label!r} has a zero-total margin; "
                "its association point is undefined")
        x, y = cell.risks()
        strata.append(RiskPoint(x, y, tag=f"stratum:{label}"))
    return crude, tuple(strata)


def standard_population(table: StratifiedCohortTable, preset: str,
                        ) -> StandardPopulation:
    """Preset stratum distributions as exact rational weights.

    study_sample: stratum totals over the grand total; exposed/unexposed:
    the stratum distribution within that exposure group.
    """
    if preset not in PRESETS:
        raise ValidationError(f"unknown preset {preset!r}; expected one of {PRESETS}")
    if preset == "study_sample":
        counts = [cell.total for cell in table.cells]
    elif preset == "exposed":
        counts = [cell.exposed_total for cell in table.cells]
    else:
        counts = [cell.unexposed_total for cell in table.cells]
    denom = sum(counts)
    if denom == 0:
        raise ValidationError(
            f"preset {preset!r} has zero individuals overall; weights undefined")
    return StandardPopulation(
        weights=tuple(Fraction(c, denom) for c in counts), preset=preset)


def standardize(strata: Sequence[RiskPoint], std: StandardPopulation,
                ) -> RiskPoint:
    """Componentwise convex combination of the stratum points."""
    if len(strata) != std.k:
        raise ValidationError(
            f"{std.k} weights for {len(strata)} stratum points")
    x = math.fsum(float(w) * p.x for w, p in zip(std.weights, strata))
    y = math.fsum(float(w) * p.y for w, p in zip(std.weights, strata))
    x = min(max(x, 0.0), 1.0)
    y = min(max(y, 0.0), 1.0)
    return RiskPoint(x, y, tag=f"standardized:{std.preset}")


def standardized_point(table: StratifiedCohortTable, std: StandardPopulation,
                       ) -> RiskPoint:
    """Standardized association point computed in exact rational arithmetic.

    With a preset standard population this makes the identities exact in
    the emitted doubles: the exposed-standard y-coordinate equals the crude
    y-coordinate bit for bit, and likewise unexposed-standard x.
    """
    if table.k != std.k:
        raise ValidationError(f"{std.k} weights for {table.k} strata")
    x = Fraction(0)
    y = Fraction(0)
    for w, cell in zip(std.weights, table.cells):
        rx, ry = cell.risks_exact()
        wf = w if isinstance(w, Fraction) else Fraction(w)
        x += wf * rx
        y += wf * ry
    return RiskPoint(float(x), float(y), tag=f"standardized:{std.preset}")


def standardized_hull(strata: Sequence[RiskPoint]) -> StandardizedHull:
    """Convex hull of the stratum points (a segment for two strata)."""
    if len(strata) < 1:
        raise ValidationError("need at least one stratum point")
    coords = [p.coords for p in strata]
    idx = convex_hull_indices(coords)
    return StandardizedHull(
        vertices=tuple(strata[i] for i in idx),
        source_points=tuple(strata),
        vertex_source_indices=tuple(idx),
    )


def confounding_rectangle(strata: Sequence[RiskPoint]) -> ConfoundingRectangle:
    """[min x, max x] x [min y, max y] over the stratum points."""
    if len(strata) < 1:
        raise ValidationError("need at least one stratum point")
    xs = [p.x for p in strata]
    ys = [p.y for p in strata]
    return ConfoundingRectangle(min(xs), max(xs), min(ys), max(ys))


def _segment_distance(p: tuple[float, float], a: tuple[float, float],
                      b: tuple[float, float]) -> float:
    ax, ay = a
    bx, by = b
    px, py = p
    dx, dy = bx - ax, by - ay
    len2 = dx * dx + dy * dy
    if len2 == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / len2
    t = min(max(t, 0.0), 1.0)
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def boundary_distance(hull: StandardizedHull, p: RiskPoint) -> float:
    """Euclidean distance from ``p`` to the hull boundary (vertices included)."""
    verts = [v.coords for v in hull.vertices]
    q = p.coords
    if len(verts) == 1:
        return math.hypot(q[0] - verts[0][0], q[1] - verts[0][1])
    dists = [_segment_distance(q, verts[i], verts[(i + 1) % len(verts)])
             for i in range(len(verts))]
    if len(verts) == 2:
        return dists[0]
    return min(dists)


def hull_distance(hull: StandardizedHull, p: RiskPoint) -> float:
    """Distance from ``p`` to the hull as a set: zero inside or on it."""
    if len(hull.vertices) >= 3:
        verts = [v.coords for v in hull.vertices]
        if all(_cross(verts[i], verts[(i + 1) % len(verts)], p.coords) >= 0
               for i in range(len(verts))):
            return 0.0
    return boundary_distance(hull, p)


def contains(hull: StandardizedHull, p: RiskPoint,
             tol: float = DEFAULT_CONTAINMENT_TOL) -> Containment:
    """Classify a point against the hull.

    ``boundary`` means within perpendicular distance ``tol`` of the hull
    boundary; otherwise ``inside``/``outside`` by the orientation of the
    counterclockwise polygon. Degenerate hulls (point, segment) have no
    interior, so everything is boundary or outside.
    """
    if tol < 0:
        raise ValidationError("tolerance must be nonnegative")
    d = boundary_distance(hull, p)
    if d <= tol:
        return Containment.BOUNDARY
    if len(hull.vertices) < 3:
        return Containment.OUTSIDE
    verts = [v.coords for v in hull.vertices]
    strictly_inside = all(
        _cross(verts[i], verts[(i + 1) % len(verts)], p.coords) > 0
        for i in range(len(verts)))
    return Containment.INSIDE if strictly_inside else Containment.OUTSIDE


def _weights_on_segment(strata: Sequence[RiskPoint], i0: int, i1: int,
                        target: RiskPoint, tol: float,
                        ) -> StandardPopulation | None:
    a = strata[i0].coords
    b = strata[i1].coords
    dx, dy = b[0] - a[0], b[1] - a[1]
    len2 = dx * dx + dy * dy
    if len2 == 0.0:
        if math.hypot(target.x - a[0], target.y - a[1]) > tol:
            return None
        t = 0.0
    else:
        t = ((target.x - a[0]) * dx + (target.y - a[1]) * dy) / len2
        t = min(max(t, 0.0), 1.0)
        if math.hypot(target.x - (a[0] + t * dx),
                      target.y - (a[1] + t * dy)) > tol:
            return None
    weights = [0.0] * len(strata)
    weights[i0] += 1.0 - t
    weights[i1] += t
    return StandardPopulation(weights=tuple(weights), preset="custom")


def weights_for_point(strata: Sequence[RiskPoint], target: RiskPoint,
                      tol: float = DEFAULT_CONTAINMENT_TOL,
                      ) -> StandardPopulation | None:
    """A standard population whose standardized point is ``target``.

    Returns None when the target lies outside the standardized hull. For
    two strata the weight on the second stratum is the unique segment
    parameter t. For k > 2 the hull is fan-triangulated from vertex 0 and
    the containing triangle is solved; interior points of a hull with more
    than three vertices have infinitely many representations, so this is
    one deterministic choice among them.
    """
    k = len(strata)
    if k < 1:
        raise ValidationError("need at least one stratum point")
    if k == 1:
        if math.hypot(target.x - strata[0].x, target.y - strata[0].y) > tol:
            return None
        return StandardPopulation(weights=(1.0,), preset="custom")
    if k == 2:
        return _weights_on_segment(strata, 0, 1, target, tol)

    hull = standardized_hull(strata)
    verts = hull.vertex_source_indices
    if len(verts) == 1:
        return _weights_on_segment(strata, verts[0], verts[0], target, tol)
    if len(verts) == 2:
        return _weights_on_segment(strata, verts[0], verts[1], target, tol)
    if contains(hull, target, tol) is Containment.OUTSIDE:
        return None

    coords = [p.coords for p in strata]
    v0 = coords[verts[0]]
    for j in range(1, len(verts) - 1):
        v1 = coords[verts[j]]
        v2 = coords[verts[j + 1]]
        det = (v1[0] - v0[0]) * (v2[1] - v0[1]) - (v2[0] - v0[0]) * (v1[1] - v0[1])
        if det == 0.0:
            continue
        rx, ry = target.x - v0[0], target.y - v0[1]
        b = (rx * (v2[1] - v0[1]) - ry * (v2[0] - v0[0])) / det
        c = (ry * (v1[0] - v0[0]) - rx * (v1[1] - v0[1])) / det
        a = 1.0 - b - c
        if min(a, b, c) < -1e-9:
            continue
        bary = [max(a, 0.0), max(b, 0.0), max(c, 0.0)]
        s = sum(bary)
        bary = [v / s for v in bary]
        weights = [0.0] * k
        for w, vi in zip(bary, (verts[0], verts[j], verts[j + 1])):
            weights[vi] += w
        rec_x = sum(w * coords[i][0] for i, w in enumerate(weights))
        rec_y = sum(w * coords[i][1] for i, w in enumerate(weights))
        if math.hypot(rec_x - target.x, rec_y - target.y) <= max(tol, 1e-9):
            return StandardPopulation(weights=tuple(weights), preset="custom")

    # Numerically on the boundary but missed by every fan triangle: project
    # onto the nearest hull edge instead.
    best = None
    best_d = math.inf
    for i in range(len(verts)):
        i0, i1 = verts[i], verts[(i + 1) % len(verts)]
        d = _segment_distance(target.coords, coords[i0], coords[i1])
        if d < best_d:
            best_d = d
            best = (i0, i1)
    if best is not None and best_d <= max(tol, 1e-9):
        return _weights_on_segment(strata, best[0], best[1], target,
                                   max(tol, 1e-9))
    return None
