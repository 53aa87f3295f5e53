"""Binomial generalized linear models on the stratified cohort design.

Fits exposure/stratum/interaction models by iteratively reweighted least
squares under the logit, log, identity, and complementary log-log links,
and provides likelihood-ratio tests, profile-likelihood confidence
intervals, and the chi-square distribution function they require.

The design uses reference-cell coding with the first stratum and the
unexposed group as references, so the exposure coefficient is directly
the adjusted measure of association on the link scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (BoundaryFitError, GlmError, NestingError,
                     NonConvergenceError, ValidationError, ZeroMarginError)
from .geometry import RiskPoint
from .tables import StratifiedCohortTable

LINKS = ("logit", "log", "identity", "cloglog")
TERMS = ("exposure_only", "exposure_plus_stratum", "saturated_with_interaction")

MU_EPS = 1e-10
MAX_ITERATIONS = 100
MAX_HALVINGS = 32
DEVIANCE_TOL = 1e-10
SCORE_TOL = 1e-8
PROFILE_BETA_TOL = 1e-9
DEFAULT_LEVEL = 0.95


@dataclass(frozen=True, slots=True)
class _Link:
    name: str
    to_eta: Callable[[np.ndarray], np.ndarray]
    to_mu: Callable[[np.ndarray], np.ndarray]
    dmu_deta: Callable[[np.ndarray], np.ndarray]
    is_ratio_scale: bool


def _expit(eta: np.ndarray) -> np.ndarray:
    out = np.empty_like(eta)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    e = np.exp(eta[~pos])
    out[~pos] = e / (1.0 + e)
    return out


_LINKS = {
    "logit": _Link(
        "logit",
        to_eta=lambda mu: np.log(mu / (1.0 - mu)),
        to_mu=_expit,
        dmu_deta=lambda eta: (lambda m: m * (1.0 - m))(_expit(eta)),
        is_ratio_scale=True),
    "log": _Link(
        "log",
        to_eta=np.log,
        to_mu=np.exp,
        dmu_deta=np.exp,
        is_ratio_scale=True),
    "identity": _Link(
        "identity",
        to_eta=lambda mu: np.asarray(mu, dtype=float),
        to_mu=lambda eta: np.asarray(eta, dtype=float),
        dmu_deta=lambda eta: np.ones_like(eta),
        is_ratio_scale=False),
    "cloglog": _Link(
        "cloglog",
        to_eta=lambda mu: np.log(-np.log1p(-mu)),
        to_mu=lambda eta: -np.expm1(-np.exp(eta)),
        dmu_deta=lambda eta: np.exp(eta - np.exp(eta)),
        is_ratio_scale=True),
}


@dataclass(frozen=True, slots=True)
class ModelSpec:
    """A binomial GLM: link, terms, and the table providing the cells."""

    link: str
    terms: str
    table: StratifiedCohortTable

    def __post_init__(self) -> None:
        if self.link not in LINKS:
            raise ValidationError(f"unknown link {self.link!r}; expected one of {LINKS}")
        if self.terms not in TERMS:
            raise ValidationError(f"unknown terms {self.terms!r}; expected one of {TERMS}")
        if self.terms == "saturated_with_interaction" and self.table.k < 2:
            raise ValidationError(
                "saturated_with_interaction needs at least two strata")


@dataclass(frozen=True, slots=True)
class GlmFit:
    """A converged maximum-likelihood fit.

    ``fitted_risks`` holds one (risk in unexposed, risk in exposed) pair
    per stratum in table order; all fitted risks are strictly inside (0, 1).
    """

    spec: ModelSpec
    coefficients: tuple[float, ...]
    coefficient_names: tuple[str, ...]
    log_likelihood: float
    deviance: float
    fitted_risks: tuple[tuple[float, float], ...]
    converged: bool
    iterations: int


@dataclass(frozen=True, slots=True)
class LrInterval:
    """Profile-likelihood interval on the measure's natural scale."""

    estimate: float
    lower: float
    upper: float
    level: float = DEFAULT_LEVEL


@dataclass(frozen=True, slots=True)
class LrTest:
    """A likelihood-ratio test of nested fits."""

    statistic: float
    df: int
    p_value: float


def _design(spec: ModelSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray,
                                      tuple[str, ...]]:
    """Design matrix plus per-row cases/totals, rows (stratum, unexp/exp)."""
    table = spec.table
    k = table.k
    s = np.empty(2 * k)
    n = np.empty(2 * k)
    for i, (label, cell) in enumerate(table.strata):
        if cell.unexposed_total == 0 or cell.exposed_total == 0:
            raise ZeroMarginError(
                f"stratum {label!r} has a zero-total exposure group; "
                "its risk is not estimable")
        s[2 * i] = cell.unexposed_cases
        n[2 * i] = cell.unexposed_total
        s[2 * i + 1] = cell.exposed_cases
        n[2 * i + 1] = cell.exposed_total

    names = ["intercept", "exposure"]
    with_stratum = spec.terms != "exposure_only"
    with_interaction = spec.terms == "saturated_with_interaction"
    if with_stratum:
        names.extend(f"stratum:{lbl}" for lbl in table.labels[1:])
    if with_interaction:
        names.extend(f"exposure:stratum:{lbl}" for lbl in table.labels[1:])

    X = np.zeros((2 * k, len(names)))
    X[:, 0] = 1.0
    X[1::2, 1] = 1.0
    for i in range(1, k):
        if with_stratum:
            X[2 * i, 2 + i - 1] = 1.0
            X[2 * i + 1, 2 + i - 1] = 1.0
        if with_interaction:
            X[2 * i + 1, 2 + (k - 1) + i - 1] = 1.0
    return X, s, n, tuple(names)


def _mu_ok(mu: np.ndarray) -> bool:
    return bool(np.all(np.isfinite(mu)) and np.all(mu > MU_EPS)
                and np.all(mu < 1.0 - MU_EPS))


def _log_likelihood(s: np.ndarray, n: np.ndarray, mu: np.ndarray) -> float:
    total = 0.0
    for si, ni, mi in zip(s, n, mu):
        total += (math.lgamma(ni + 1.0) - math.lgamma(si + 1.0)
                  - math.lgamma(ni - si + 1.0)
                  + si * math.log(mi) + (ni - si) * math.log1p(-mi))
    return total


def _deviance(s: np.ndarray, n: np.ndarray, mu: np.ndarray) -> float:
    total = 0.0
    for si, ni, mi in zip(s, n, mu):
        if si > 0.0:
            total += si * math.log(si / (ni * mi))
        if ni - si > 0.0:
            total += (ni - si) * math.log((ni - si) / (ni * (1.0 - mi)))
    return 2.0 * total


def _score(X: np.ndarray, s: np.ndarray, n: np.ndarray, mu: np.ndarray,
           eta: np.ndarray, link: _Link) -> np.ndarray:
    r = (s - n * mu) * link.dmu_deta(eta) / (mu * (1.0 - mu))
    return X.T @ r


@dataclass(slots=True)
class _FitState:
    beta: np.ndarray
    eta: np.ndarray
    mu: np.ndarray
    log_likelihood: float
    deviance: float
    iterations: int
    converged: bool


def _start(X: np.ndarray, s: np.ndarray, n: np.ndarray, link: _Link,
           offset: np.ndarray) -> np.ndarray:
    """Initial coefficients from empirically smoothed cell proportions."""
    mu0 = (s + 0.5) / (n + 1.0)
    eta0 = link.to_eta(mu0)
    beta, *_ = np.linalg.lstsq(X, eta0 - offset, rcond=None)
    with np.errstate(all="ignore"):
        mu = link.to_mu(X @ beta + offset)
    if _mu_ok(mu):
        return beta
    beta = np.zeros(X.shape[1])
    overall = (float(s.sum()) + 0.5) / (float(n.sum()) + 1.0)
    beta[0] = float(link.to_eta(np.array([overall]))[0])
    with np.errstate(all="ignore"):
        mu = link.to_mu(X @ beta + offset)
    if not _mu_ok(mu):
        raise NonConvergenceError(
            f"no feasible starting point under the {link.name} link", trace=[])
    return beta


def _irls(X: np.ndarray, s: np.ndarray, n: np.ndarray, link: _Link,
          offset: np.ndarray | None = None) -> _FitState:
    if offset is None:
        offset = np.zeros(len(s))
    p_obs = s / n
    beta = _start(X, s, n, link, offset)
    eta = X @ beta + offset
    mu = link.to_mu(eta)
    dev = _deviance(s, n, mu)
    trace = [dev]
    converged = False
    iterations = 0

    for iterations in range(1, MAX_ITERATIONS + 1):
        dinv = link.dmu_deta(eta)
        w = n * dinv * dinv / (mu * (1.0 - mu))
        z = (eta - offset) + (p_obs - mu) / dinv
        a = X.T @ (X * w[:, None])
        b = X.T @ (w * z)
        try:
            proposal = np.linalg.solve(a, b)
        except np.linalg.LinAlgError as exc:
            raise GlmError(f"singular weighted design matrix: {exc}") from exc

        step = 1.0
        accepted = False
        for _ in range(MAX_HALVINGS + 1):
            beta_try = beta + step * (proposal - beta)
            with np.errstate(all="ignore"):
                eta_try = X @ beta_try + offset
                mu_try = link.to_mu(eta_try)
            if _mu_ok(mu_try):
                dev_try = _deviance(s, n, mu_try)
                if dev_try <= dev + 1e-12:
                    accepted = True
                    break
            step /= 2.0
        if not accepted:
            # The full step and every halving either left the domain or
            # raised the deviance; accept the current point if it already
            # satisfies the score criterion.
            score = _score(X, s, n, mu, eta, link)
            if float(np.max(np.abs(score))) < SCORE_TOL:
                converged = True
                break
            raise NonConvergenceError(
                f"step halving exhausted after {iterations} iterations "
                f"under the {link.name} link", trace=trace)

        beta, eta, mu = beta_try, eta_try, mu_try
        trace.append(dev_try)
        score = _score(X, s, n, mu, eta, link)
        if (abs(dev - dev_try) < DEVIANCE_TOL
                and float(np.max(np.abs(score))) < SCORE_TOL):
            dev = dev_try
            converged = True
            break
        dev = dev_try

    if not converged:
        raise NonConvergenceError(
            f"no convergence in {MAX_ITERATIONS} iterations under the "
            f"{link.name} link", trace=trace)
    if np.any(mu <= 5.0 * MU_EPS) or np.any(mu >= 1.0 - 5.0 * MU_EPS):
        pinned = [int(i) for i in np.nonzero(
            (mu <= 5.0 * MU_EPS) | (mu >= 1.0 - 5.0 * MU_EPS))[0]]
        raise BoundaryFitError(
            f"fitted risks pinned to the boundary at rows {pinned} under "
            f"the {link.name} link")
    return _FitState(beta=beta, eta=eta, mu=mu,
                     log_likelihood=_log_likelihood(s, n, mu),
                     deviance=_deviance(s, n, mu),
                     iterations=iterations, converged=True)


def fit(spec: ModelSpec) -> GlmFit:
    """Maximum-likelihood fit of the model by IRLS with step halving."""
    X, s, n, names = _design(spec)
    link = _LINKS[spec.link]
    state = _irls(X, s, n, link)
    k = spec.table.k
    fitted = tuple((float(state.mu[2 * i]), float(state.mu[2 * i + 1]))
                   for i in range(k))
    return GlmFit(spec=spec,
                  coefficients=tuple(float(c) for c in state.beta),
                  coefficient_names=names,
                  log_likelihood=state.log_likelihood,
                  deviance=state.deviance,
                  fitted_risks=fitted,
                  converged=state.converged,
                  iterations=state.iterations)


def natural_scale(link: str, value: float) -> float:
    """Map a link-scale coefficient to the measure's reporting scale."""
    if link not in LINKS:
        raise ValidationError(f"unknown link {link!r}")
    if _LINKS[link].is_ratio_scale:
        return math.exp(value)
    return value


def exposure_estimate(fit_result: GlmFit) -> float:
    """The exposure effect on the natural scale (exponentiated for ratios)."""
    return natural_scale(fit_result.spec.link, fit_result.coefficients[1])


def stratum_exposure_estimates(fit_result: GlmFit) -> tuple[float, ...]:
    """Per-stratum exposure effect on the natural scale.

    Only the saturated model has stratum-specific effects; the other term
    structures repeat the common effect.
    """
    spec = fit_result.spec
    k = spec.table.k
    beta_x = fit_result.coefficients[1]
    if spec.terms != "saturated_with_interaction":
        return tuple(natural_scale(spec.link, beta_x) for _ in range(k))
    interactions = fit_result.coefficients[2 + (k - 1):]
    effects = [beta_x] + [beta_x + g for g in interactions]
    return tuple(natural_scale(spec.link, e) for e in effects)


def fitted_stratum_points(fit_result: GlmFit) -> tuple[RiskPoint, ...]:
    """Fitted (unexposed, exposed) risks per stratum as diagram points."""
    labels = fit_result.spec.table.labels
    return tuple(RiskPoint(x, y, tag=f"fitted:{label}")
                 for (x, y), label in zip(fit_result.fitted_risks, labels))


def lr_test(null_fit: GlmFit, alt_fit: GlmFit, df: int) -> float:
    """p-value of the likelihood-ratio test for nested fits."""
    if df < 1:
        raise ValidationError("df must be a positive integer")
    stat = 2.0 * (alt_fit.log_likelihood - null_fit.log_likelihood)
    if stat < -1e-8:
        raise NestingError(
            f"likelihood ratio statistic {stat} is negative; the null "
            "model is not nested in the alternative")
    return 1.0 - chi_square_cdf(max(stat, 0.0), df)


def _profile_log_likelihood(X: np.ndarray, s: np.ndarray, n: np.ndarray,
                            link: _Link, beta_x: float) -> float:
    """Log-likelihood with the exposure coefficient fixed at beta_x."""
    keep = [j for j in range(X.shape[1]) if j != 1]
    offset = beta_x * X[:, 1]
    return _irls(X[:, keep], s, n, link, offset=offset).log_likelihood


def exposure_test(spec: ModelSpec) -> LrTest:
    """Likelihood-ratio test of a zero exposure coefficient (df = 1)."""
    X, s, n, _ = _design(spec)
    link = _LINKS[spec.link]
    full = _irls(X, s, n, link)
    null_ll = _profile_log_likelihood(X, s, n, link, 0.0)
    stat = max(2.0 * (full.log_likelihood - null_ll), 0.0)
    return LrTest(statistic=stat, df=1,
                  p_value=1.0 - chi_square_cdf(stat, 1))


def interaction_test(table: StratifiedCohortTable, link: str) -> LrTest:
    """Likelihood-ratio test of the exposure-stratum interaction terms."""
    if table.k < 2:
        raise ValidationError("interaction test needs at least two strata")
    null_fit = fit(ModelSpec(link=link, terms="exposure_plus_stratum",
                             table=table))
    alt_fit = fit(ModelSpec(link=link, terms="saturated_with_interaction",
                            table=table))
    df = table.k - 1
    stat = max(2.0 * (alt_fit.log_likelihood - null_fit.log_likelihood), 0.0)
    return LrTest(statistic=stat, df=df,
                  p_value=1.0 - chi_square_cdf(stat, df))


def profile_interval(spec: ModelSpec, level: float = DEFAULT_LEVEL,
                     ) -> LrInterval:
    """Profile-likelihood interval for the exposure effect.

    Endpoints are the coefficients where the likelihood-ratio statistic
    against the maximum reaches the chi-square(1) quantile, found by
    bracket doubling and bisection; an endpoint that never brackets is
    reported as unbounded (0 or inf on a ratio scale).
    """
    if not 0.0 < level < 1.0:
        raise ValidationError(f"level must be in (0, 1), got {level!r}")
    X, s, n, _ = _design(spec)
    link = _LINKS[spec.link]
    full = _irls(X, s, n, link)
    beta_hat = float(full.beta[1])
    ll_max = full.log_likelihood
    target = chi_square_quantile(level, 1)

    def drop(beta_x: float) -> float:
        try:
            return 2.0 * (ll_max - _profile_log_likelihood(X, s, n, link,
                                                           beta_x))
        except GlmError:
            return math.inf

    dinv = link.dmu_deta(full.eta)
    w = n * dinv * dinv / (full.mu * (1.0 - full.mu))
    a = X.T @ (X * w[:, None])
    try:
        se = float(math.sqrt(np.linalg.inv(a)[1, 1]))
    except (np.linalg.LinAlgError, ValueError):
        se = math.nan
    step0 = se * math.sqrt(target) if math.isfinite(se) and se > 0 else 0.5

    endpoints = []
    for side in (-1.0, 1.0):
        step = step0
        inside = beta_hat
        outside = None
        for _ in range(64):
            candidate = beta_hat + side * step
            if drop(candidate) >= target:
                outside = candidate
                break
            inside = candidate
            step *= 2.0
        if outside is None:
            endpoints.append(side * math.inf)
            continue
        lo, hi = inside, outside
        while abs(hi - lo) > PROFILE_BETA_TOL:
            mid = (lo + hi) / 2.0
            if drop(mid) < target:
                lo = mid
            else:
                hi = mid
        endpoints.append((lo + hi) / 2.0)

    lower, upper = endpoints
    return LrInterval(estimate=natural_scale(spec.link, beta_hat),
                      lower=natural_scale(spec.link, lower),
                      upper=natural_scale(spec.link, upper),
                      level=level)


def chi_square_cdf(x: float, df: int) -> float:
    """Chi-square distribution function via the regularized lower gamma."""
    if df < 1 or int(df) != df:
        raise ValidationError(f"df must be a positive integer, got {df!r}")
    if x < 0:
        raise ValidationError(f"x must be nonnegative, got {x!r}")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    a = df / 2.0
    t = x / 2.0
    log_scale = a * math.log(t) - t - math.lgamma(a)
    if t < a + 1.0:
        # Series for the lower regularized gamma.
        term = 1.0 / a
        total = term
        k = a
        while True:
            k += 1.0
            term *= t / k
            total += term
            if term < total * 1e-17:
                break
        return min(1.0, total * math.exp(log_scale))
    # Lentz continued fraction for the upper regularized gamma.
    tiny = 1e-300
    b = t + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 500):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return max(0.0, 1.0 - math.exp(log_scale) * h)


def chi_square_quantile(p: float, df: int) -> float:
    """Inverse of chi_square_cdf in p, by bisection."""
    if not 0.0 <= p < 1.0:
        raise ValidationError(f"p must be in [0, 1), got {p!r}")
    if p == 0.0:
        return 0.0
    hi = 1.0
    while chi_square_cdf(hi, df) < p:
        hi *= 2.0
        if hi > 1e12:
            raise GlmError(f"quantile search overflow for p={p}, df={df}")
    lo = 0.0
    for _ in range(200):
        mid = (lo + hi) / 2.0
        if mid == lo or mid == hi:
            break
        if chi_square_cdf(mid, df) < p:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0
