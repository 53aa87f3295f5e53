"""Potential-outcomes populations: exact truth and finite sampling.

A population is described by the stratum distribution, the exposure
probability within each stratum, and the joint distribution of the two
potential outcomes (D0, D1) within each stratum. Exposure is assigned
independently of the potential outcomes given the stratum, so stratum
association points equal stratum causal points exactly; only the crude
point can be distorted, which is what makes the module useful as ground
truth for confounding checks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np

from .errors import ParseError, ValidationError
from .geometry import RiskPoint
from .tables import CohortCell, StratifiedCohortTable

DIST_SUM_TOL = 1e-12


def _exact(value) -> Fraction:
    if isinstance(value, Rational):
        return Fraction(value)
    return Fraction(float(value))


def _check_distribution(values: Sequence, what: str) -> None:
    if any(v < 0 or v > 1 for v in values):
        raise ValidationError(f"{what} must lie in [0, 1]: {values!r}")
    if abs(float(sum(values)) - 1.0) > DIST_SUM_TOL:
        raise ValidationError(
            f"{what} must sum to 1 within {DIST_SUM_TOL}: sum="
            f"{float(sum(values))!r}")


@dataclass(frozen=True, slots=True)
class PopulationSpec:
    """A stratified population over (C, X, D0, D1).

    ``po_probs[c]`` is the joint distribution (p00, p01, p10, p11) of
    (D0, D1) given C = c, in the order Pr(D0=a, D1=b) for (a, b) =
    (0,0), (0,1), (1,0), (1,1). Probabilities may be floats or exact
    rationals; exact arithmetic converts floats losslessly.
    """

    stratum_probs: tuple
    exposure_probs: tuple
    po_probs: tuple

    def __post_init__(self) -> None:
        sp = tuple(self.stratum_probs)
        ep = tuple(self.exposure_probs)
        po = tuple(tuple(row) for row in self.po_probs)
        object.__setattr__(self, "stratum_probs", sp)
        object.__setattr__(self, "exposure_probs", ep)
        object.__setattr__(self, "po_probs", po)
        if len(sp) < 1:
            raise ValidationError("population needs at least one stratum")
        if len(ep) != len(sp) or len(po) != len(sp):
            raise ValidationError(
                "stratum_probs, exposure_probs, and po_probs must have "
                f"equal length: {len(sp)}, {len(ep)}, {len(po)}")
        _check_distribution(sp, "stratum probabilities")
        if any(e < 0 or e > 1 for e in ep):
            raise ValidationError(
                f"exposure probabilities must lie in [0, 1]: {ep!r}")
        for c, row in enumerate(po):
            if len(row) != 4:
                raise ValidationError(
                    f"po_probs[{c}] must have four entries, got {len(row)}")
            _check_distribution(row, f"po_probs[{c}]")

    @property
    def k(self) -> int:
        return len(self.stratum_probs)

    def causal_risks_exact(self) -> tuple[tuple[Fraction, Fraction], ...]:
        """Per stratum (Pr(D0=1 | c), Pr(D1=1 | c)) as exact rationals."""
        out = []
        for row in self.po_probs:
            p00, p01, p10, p11 = (_exact(v) for v in row)
            out.append((p10 + p11, p01 + p11))
        return tuple(out)

    def to_json_dict(self) -> dict:
        return {
            "stratum_probs": [float(v) for v in self.stratum_probs],
            "exposure_probs": [float(v) for v in self.exposure_probs],
            "po_probs": [[float(v) for v in row] for row in self.po_probs],
        }


@dataclass(frozen=True, slots=True)
class PopulationTruth:
    """Exact expectations implied by a PopulationSpec.

    Causal points use counterfactual risks; association points use
    conditional risks among the exposed and unexposed. The ``*_exact``
    fields carry the same quantities as rationals for exact geometry.
    """

    causal_points: tuple[RiskPoint, ...]
    marginal_causal_point: RiskPoint
    association_points: tuple[RiskPoint, ...]
    crude_point: RiskPoint
    confounded: bool
    stratum_exact: tuple[tuple[Fraction, Fraction], ...]
    marginal_exact: tuple[Fraction, Fraction]
    crude_exact: tuple[Fraction, Fraction]


def population_truth(spec: PopulationSpec) -> PopulationTruth:
    """Exact causal and association points for the population.

    Requires every (stratum, exposure) margin to have positive
    probability, otherwise the corresponding conditional risk is
    undefined.
    """
    weights = [_exact(w) for w in spec.stratum_probs]
    exposure = [_exact(e) for e in spec.exposure_probs]
    risks = spec.causal_risks_exact()

    for c, (w, e) in enumerate(zip(weights, exposure)):
        if w == 0:
            raise ValidationError(f"stratum {c} has probability zero")
        if e == 0:
            raise ValidationError(f"cell (stratum {c}, exposed) has probability zero")
        if e == 1:
            raise ValidationError(f"cell (stratum {c}, unexposed) has probability zero")

    marginal_x = sum(w * x for w, (x, _) in zip(weights, risks))
    marginal_y = sum(w * y for w, (_, y) in zip(weights, risks))

    unexposed_mass = sum(w * (1 - e) for w, e in zip(weights, exposure))
    exposed_mass = sum(w * e for w, e in zip(weights, exposure))
    crude_x = sum(w * (1 - e) * x
                  for w, e, (x, _) in zip(weights, exposure, risks)) / unexposed_mass
    crude_y = sum(w * e * y
                  for w, e, (_, y) in zip(weights, exposure, risks)) / exposed_mass

    exposure_varies = any(e != exposure[0] for e in exposure[1:])
    points_differ = any(r != risks[0] for r in risks[1:])
    confounded = exposure_varies and points_differ

    causal_points = tuple(
        RiskPoint(float(x), float(y), tag=f"causal:{c}")
        for c, (x, y) in enumerate(risks))
    association_points = tuple(
        RiskPoint(float(x), float(y), tag=f"stratum:{c}")
        for c, (x, y) in enumerate(risks))
    return PopulationTruth(
        causal_points=causal_points,
        marginal_causal_point=RiskPoint(float(marginal_x), float(marginal_y),
                                        tag="causal:marginal"),
        association_points=association_points,
        crude_point=RiskPoint(float(crude_x), float(crude_y), tag="crude"),
        confounded=confounded,
        stratum_exact=risks,
        marginal_exact=(marginal_x, marginal_y),
        crude_exact=(crude_x, crude_y),
    )


def sample_table(spec: PopulationSpec, n: int, seed: int,
                 ) -> StratifiedCohortTable:
    """Sample n individuals (C, X, D) with D set by consistency.

    Draws use a Philox counter-based generator, so output is reproducible
    for a given seed across runs and platforms. Strata are labeled
    s1..sk in spec order; strata with no sampled individuals keep empty
    cells.
    """
    if n < 1:
        raise ValidationError(f"sample size must be positive, got {n!r}")
    rng = np.random.Generator(np.random.Philox(seed))
    k = spec.k

    stratum_cum = np.cumsum([float(w) for w in spec.stratum_probs])
    stratum_cum[-1] = 1.0
    c = np.searchsorted(stratum_cum, rng.random(n), side="right")
    c = np.minimum(c, k - 1)

    exposure = np.array([float(e) for e in spec.exposure_probs])
    x = (rng.random(n) < exposure[c]).astype(np.int64)

    po_cum = np.cumsum([[float(v) for v in row] for row in spec.po_probs],
                       axis=1)
    po_cum[:, -1] = 1.0
    u = rng.random(n)
    joint = np.empty(n, dtype=np.int64)
    for i in range(k):
        mask = c == i
        joint[mask] = np.searchsorted(po_cum[i], u[mask], side="right")
    joint = np.minimum(joint, 3)
    d0 = joint // 2
    d1 = joint % 2

    potential = np.stack([d0, d1], axis=1)
    d = potential[np.arange(n), x]
    assert np.array_equal(d, np.where(x == 1, d1, d0))

    strata = []
    for i in range(k):
        in_stratum = c == i
        exposed = in_stratum & (x == 1)
        unexposed = in_stratum & (x == 0)
        cell = CohortCell(
            exposed_cases=int(np.sum(exposed & (d == 1))),
            exposed_total=int(np.sum(exposed)),
            unexposed_cases=int(np.sum(unexposed & (d == 1))),
            unexposed_total=int(np.sum(unexposed)),
        )
        strata.append((f"s{i + 1}", cell))
    return StratifiedCohortTable(strata=tuple(strata))


def parse_population_spec(source: str | dict) -> PopulationSpec:
    """Read a PopulationSpec from its JSON text or an equivalent dict."""
    if isinstance(source, str):
        try:
            data = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid population JSON: {exc}") from exc
    else:
        data = source
    if not isinstance(data, dict):
        raise ParseError("population spec must be a JSON object")
    missing = {"stratum_probs", "exposure_probs", "po_probs"} - set(data)
    if missing:
        raise ParseError(f"population spec missing keys: {sorted(missing)}")
    try:
        return PopulationSpec(
            stratum_probs=tuple(data["stratum_probs"]),
            exposure_probs=tuple(data["exposure_probs"]),
            po_probs=tuple(tuple(row) for row in data["po_probs"]),
        )
    except TypeError as exc:
        raise ParseError(f"malformed population spec: {exc}") from exc
