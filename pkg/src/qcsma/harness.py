"""Replica orchestration, estimators and distribution comparisons."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import AllCensored, DegenerateSpan, TooFewSamples
from .engine import TransitionReport, simulate_run
from .params import ModelKind, NetworkSpec, RateFunction
from .theory import TheoryReport, limit_law_P

__all__ = [
    "ReplicaBatch",
    "DistributionComparison",
    "replica_seed",
    "run_replicas",
    "merge_batches",
    "estimate_mean",
    "survival_compare",
    "exponent_fit",
    "gap_statistic",
]


def replica_seed(seedbase: int, index: int) -> int:
    """Deterministic, distinct seed for replica `index`."""
    return (int(seedbase) * 1_000_003 + index) & 0x7FFFFFFFFFFFFFFF


@dataclass
class ReplicaBatch:
    spec: NetworkSpec
    model: ModelKind
    n: int
    seedbase: int
    reports: list  # of TransitionReport, indexed by replica
    wall_seconds: float = 0.0

    @property
    def uncensored(self):
        return [r for r in self.reports if r.tau is not None]

    @property
    def censored_fraction(self) -> float:
        return 1.0 - len(self.uncensored) / len(self.reports)


def run_replicas(
    spec: NetworkSpec,
    model: ModelKind,
    g_u: RateFunction,
    g_v: RateFunction,
    n: int,
    seedbase: int,
    horizon_mult: float = 3.0,
) -> ReplicaBatch:
    """n independent runs with seeds derived from (seedbase, index)."""
    t0 = time.perf_counter()
    reports = [
        simulate_run(
            spec, model, g_u, g_v, replica_seed(seedbase, k), horizon_mult=horizon_mult
        ).report
        for k in range(n)
    ]
    return ReplicaBatch(
        spec=spec,
        model=model,
        n=n,
        seedbase=seedbase,
        reports=reports,
        wall_seconds=time.perf_counter() - t0,
    )


def merge_batches(a: ReplicaBatch, b: ReplicaBatch) -> ReplicaBatch:
    """Merge two batches; aggregation is keyed by replica order, so the
    resulting statistics do not depend on the merge order beyond the
    concatenation being sorted by (seedbase, index)."""
    key = lambda r: (r.seed,)  # noqa: E731
    reports = sorted(a.reports + b.reports, key=key)
    return ReplicaBatch(
        spec=a.spec,
        model=a.model,
        n=a.n + b.n,
        seedbase=min(a.seedbase, b.seedbase),
        reports=reports,
        wall_seconds=a.wall_seconds + b.wall_seconds,
    )


def estimate_mean(batch_or_taus):
    """Sample mean, standard error and normal 95% CI of uncensored taus."""
    taus = _taus(batch_or_taus)
    if len(taus) < 2:
        raise AllCensored("need at least 2 uncensored replicas")
    mean = float(np.mean(taus))
    se = float(np.std(taus, ddof=1) / math.sqrt(len(taus)))
    return mean, se, (mean - 1.96 * se, mean + 1.96 * se)


def _taus(batch_or_taus):
    if isinstance(batch_or_taus, ReplicaBatch):
        if not batch_or_taus.uncensored:
            raise AllCensored("every replica was censored")
        return np.array([r.tau for r in batch_or_taus.uncensored])
    return np.asarray(batch_or_taus, dtype=float)


@dataclass
class DistributionComparison:
    xs: np.ndarray  # sorted normalized values
    empirical_survival: np.ndarray  # right-continuous step values at xs
    theory_survival: np.ndarray
    sup_distance: float
    sample_size: int


def _limit_law_left(report: TheoryReport, x: float) -> float:
    """Left limit of the limit law; differs from P(x) only at a jump."""
    if report.regime == "supercritical" and x == 1.0:
        return 1.0
    return limit_law_P(report, x)


def survival_compare(batch_or_taus, report: TheoryReport) -> DistributionComparison:
    """Sup-distance between the empirical survival of tau/mean and the limit law.

    Normalization uses the empirical mean, matching the ratio form of the
    limit statement.  The supremum is evaluated on both sides of every
    jump, pairing left limits with left limits so that a law with a jump
    is at distance zero from a sample concentrated on the jump point.
    """
    taus = _taus(batch_or_taus)
    if len(taus) < 100:
        raise TooFewSamples(f"need >= 100 uncensored replicas, got {len(taus)}")
    sorted_all = np.sort(taus / np.mean(taus))
    n = len(sorted_all)
    xs = np.unique(sorted_all)
    # S(x) = fraction strictly above x, S(x^-) = fraction at or above x
    surv_after = 1.0 - np.searchsorted(sorted_all, xs, side="right") / n
    surv_before = 1.0 - np.searchsorted(sorted_all, xs, side="left") / n
    theory = np.array([limit_law_P(report, x) for x in xs])
    theory_left = np.array([_limit_law_left(report, x) for x in xs])
    sup = float(
        max(
            np.max(np.abs(surv_after - theory)),
            np.max(np.abs(surv_before - theory_left)),
        )
    )
    return DistributionComparison(
        xs=xs,
        empirical_survival=surv_after,
        theory_survival=theory,
        sup_distance=sup,
        sample_size=n,
    )


def exponent_fit(sweep):
    """Least-squares slope of log(mean tau) against log(r).

    sweep is a sequence of (r, mean_tau) pairs covering at least a decade
    with at least four distinct r values.
    """
    rs = np.array([p[0] for p in sweep], dtype=float)
    means = np.array([p[1] for p in sweep], dtype=float)
    if len(set(rs)) < 4 or rs.max() / rs.min() < 10.0:
        raise DegenerateSpan("need >= 4 distinct r values spanning >= one decade")
    x = np.log(rs)
    y = np.log(means)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), float(r2)


def gap_statistic(batch: ReplicaBatch, g_v: RateFunction, spec: NetworkSpec):
    """Median and upper quartile of (tau - tau_bar) * g_V(gamma_V r)."""
    gaps = [
        r.tau - r.tau_bar
        for r in batch.reports
        if r.tau is not None and r.tau_bar is not None
    ]
    if len(gaps) < 100:
        raise TooFewSamples(f"need >= 100 complete replicas, got {len(gaps)}")
    scale = g_v(spec.gamma_v * spec.r)
    scaled = np.array(gaps) * scale
    return float(np.median(scaled)), float(np.quantile(scaled, 0.75))
