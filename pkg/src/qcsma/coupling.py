"""Shared-clock couplings between the queue-driven and external models.

Every node carries one unit-rate deactivation clock and one activation
clock ticking at the majorant rate g(h(t)), shared by all coupled copies.
A single uniform draw per tick realises the nested acceptance regions,
so the copy with the smaller acceptance probability activates only if
the larger one does.  The majorant h(t) is the pointwise maximum of the
two upper tube bounds plus a margin of delta*r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CouplingUndefined, MajorantViolated
from .params import Model, NetworkSpec, RateFunction, external_argument

__all__ = ["CoupledRun", "coupled_run_low", "coupled_run_upp", "sandwich_stats", "run_coupled"]

QUEUE_COPIES = ("int", "iso")


@dataclass
class CoupledRun:
    seed: int
    taus: dict  # copy name -> transition time or None
    tau_bars: dict  # copy name -> pre-transition time or None
    ordering_violations: int
    on_good_event: bool
    majorant_violated: bool
    horizon: float

    def to_json_dict(self) -> dict:
        return {
            "seed": self.seed,
            "tau_low": self.taus.get("low"),
            "tau_int": self.taus.get("int"),
            "tau_bar_iso": self.tau_bars.get("iso"),
            "tau_bar_upp": self.tau_bars.get("upp"),
            "tau_upp": self.taus.get("upp"),
            "ordered_low": self.ordering_violations == 0,
            "ordered_upp": self.ordering_violations == 0,
            "good": self.on_good_event,
            "censored_flags": {k: v is None for k, v in self.taus.items()},
        }


def _majorant(spec: NetworkSpec):
    """h(t) = max(U upper bound, V upper bound) + delta*r, piecewise affine."""
    dr = spec.delta * spec.r
    a_u = spec.gamma_u * spec.r + 2.0 * dr  # decreasing piece, slope -(c-rho_U)
    s_u = spec.c - spec.rho_u
    a_v = spec.gamma_v * spec.r + dr  # increasing piece, slope rho_V
    s_v = spec.rho_v

    def h(t):
        return max(a_u - s_u * t, a_v + s_v * t) + dr

    t_cross = (a_u - a_v) / (s_u + s_v)
    return h, max(t_cross, 0.0)


def _next_clock_tick(g, h, t_cross, k, t0, rng, t_end):
    """Next tick of a clock with rate k*g(h(t)), h piecewise affine (down, up)."""
    from .engine import next_inhomogeneous_arrival

    rate = lambda s: k * g(h(s))  # noqa: E731
    if t0 < t_cross:
        cand = next_inhomogeneous_arrival(rate, t0, "decreasing", rng, min(t_cross, t_end))
        if cand < t_cross:
            return cand
        t0 = t_cross
    if t0 >= t_end:
        return math.inf
    return next_inhomogeneous_arrival(rate, t0, "increasing", rng, t_end)


def run_coupled(
    spec: NetworkSpec,
    g_u: RateFunction,
    g_v: RateFunction,
    seed: int,
    copies: tuple = ("int", "low"),
    horizon_slack: float = 0.05,
) -> CoupledRun:
    """Run a set of model copies on shared clocks.

    copies is a subset of {"int", "iso", "low", "upp"}.  Queue-driven
    copies share one arrival stream, so the internal and isolated copies
    coincide exactly up to the internal pre-transition time.  Ordering of
    the activity processes (lower <= internal on U and the reverse on V;
    isolated <= upper on U and the reverse on V, up to the isolated
    pre-transition) is checked at every event boundary inside [0, T_U].
    """
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    n_u, n_v = spec.size_u, spec.size_v
    n = n_u + n_v
    c = spec.c
    dr = spec.delta * spec.r
    t_u_horizon = spec.t_u
    horizon = (1.0 + horizon_slack) * t_u_horizon
    h, t_cross = _majorant(spec)
    lam = [spec.lambda_u] * n_u + [spec.lambda_v] * n_v
    inv_mu = 1.0 / spec.mu

    active = {m: [True] * n_u + [False] * n_v for m in copies}
    queues = {
        m: [spec.gamma_u * spec.r] * n_u + [spec.gamma_v * spec.r] * n_v
        for m in copies
        if m in QUEUE_COPIES
    }
    track_queues = bool(queues)
    next_arrival = (
        [rng.exponential() / lam[i] for i in range(n)] if track_queues else None
    )

    taus = {m: None for m in copies}
    tau_bars = {m: None for m in copies}
    violations = 0
    good = True
    majorant_violated = False
    t = 0.0

    def copy_rate(m, i, tt):
        side = "U" if i < n_u else "V"
        g = g_u if side == "U" else g_v
        if m == "int" or m == "iso":
            return g(queues[m][i])
        model = Model.LOWER if m == "low" else Model.UPPER
        return g(external_argument(model, side, tt, spec))

    def blocked(m, i):
        if i < n_u:
            if m == "iso":
                return False
            return any(active[m][n_u:])
        return any(active[m][:n_u])

    def in_tube(m, i, tt):
        q = queues[m][i]
        if i < n_u:
            center = spec.gamma_u * spec.r - (spec.c - spec.rho_u) * tt
            return center - dr <= q <= center + 2.0 * dr
        center = spec.gamma_v * spec.r + spec.rho_v * tt
        return center - dr <= q <= center + dr

    def check_ordering(tt):
        nonlocal violations
        if tt > t_u_horizon:
            return
        if "int" in copies and "low" in copies:
            for i in range(n):
                lo, it = active["low"][i], active["int"][i]
                if i < n_u:
                    if lo and not it:
                        violations += 1
                elif it and not lo:
                    violations += 1
        if "iso" in copies and "upp" in copies and tau_bars["iso"] is None:
            for i in range(n):
                iso, up = active["iso"][i], active["upp"][i]
                if i < n_u:
                    if iso and not up:
                        violations += 1
                elif up and not iso:
                    violations += 1

    def all_done():
        return all(taus[m] is not None for m in copies if m != "iso")

    while t < horizon and not all_done():
        # drains per queue copy
        drains = {}
        for m in queues:
            drains[m] = [
                (c if active[m][i] and not (m == "iso" and i >= n_u) else 0.0)
                for i in range(n)
            ]

        # shared deactivation clock: nodes active in at least one copy
        deact_nodes = [i for i in range(n) if any(active[m][i] for m in copies)]
        t_deact = (
            t + rng.exponential() / len(deact_nodes) if deact_nodes else math.inf
        )

        # shared activation clocks per side: nodes idle and unblocked somewhere
        def idle_nodes(side):
            rng_idx = range(n_u) if side == "U" else range(n_u, n)
            out = []
            for i in rng_idx:
                for m in copies:
                    if not active[m][i] and not blocked(m, i):
                        out.append(i)
                        break
            return out

        idle_u = idle_nodes("U")
        idle_v = idle_nodes("V")
        t_act_u = (
            _next_clock_tick(g_u, h, t_cross, len(idle_u), t, rng, horizon)
            if idle_u
            else math.inf
        )
        t_act_v = (
            _next_clock_tick(g_v, h, t_cross, len(idle_v), t, rng, horizon)
            if idle_v
            else math.inf
        )

        t_arr = math.inf
        arr_i = -1
        if track_queues:
            for i in range(n):
                if next_arrival[i] < t_arr:
                    t_arr = next_arrival[i]
                    arr_i = i

        t_zero = math.inf
        zero_mi = None
        for m in queues:
            for i in range(n):
                if drains[m][i] > 0.0:
                    tz = t + queues[m][i] / drains[m][i]
                    if tz < t_zero:
                        t_zero = tz
                        zero_mi = (m, i)

        t_next = min(t_deact, t_act_u, t_act_v, t_arr, t_zero, horizon)
        dt = t_next - t
        for m in queues:
            for i in range(n):
                if drains[m][i] > 0.0:
                    queues[m][i] = max(queues[m][i] - drains[m][i] * dt, 0.0)
        t = t_next
        if t >= horizon:
            break

        if t == t_arr:
            size = rng.exponential() * inv_mu
            for m in queues:
                queues[m][arr_i] += size
            next_arrival[arr_i] = t + rng.exponential() / lam[arr_i]
        elif t == t_zero:
            m, i = zero_mi
            queues[m][i] = 0.0
            active[m][i] = False
        elif t == t_deact:
            i = deact_nodes[int(rng.random() * len(deact_nodes))]
            for m in copies:
                if active[m][i]:
                    active[m][i] = False
        else:
            side = "U" if t == t_act_u else "V"
            nodes = idle_u if side == "U" else idle_v
            i = nodes[int(rng.random() * len(nodes))]
            g = g_u if side == "U" else g_v
            maj = g(h(t))
            w = rng.random()
            for m in copies:
                if active[m][i] or blocked(m, i):
                    continue
                rate = copy_rate(m, i, t)
                if rate > maj * (1.0 + 1e-9):
                    majorant_violated = True
                    break
                if w * maj < rate:
                    active[m][i] = True
                    if i >= n_u and tau_bars[m] is None:
                        tau_bars[m] = t
            if majorant_violated:
                break

        # good-behavior flag on the queue copies, inside [0, T_U]
        if good and t <= t_u_horizon:
            for m in queues:
                # only meaningful before the copy's own transition
                if taus[m] is None and not all(in_tube(m, i, t) for i in range(n)):
                    good = False
                    break

        check_ordering(t)
        for m in copies:
            if (
                taus[m] is None
                and sum(active[m][n_u:]) == n_v
                and sum(active[m][:n_u]) == 0
            ):
                taus[m] = t

    return CoupledRun(
        seed=seed,
        taus=taus,
        tau_bars=tau_bars,
        ordering_violations=violations,
        on_good_event=good,
        majorant_violated=majorant_violated,
        horizon=horizon,
    )


def coupled_run_low(
    spec: NetworkSpec, g_u: RateFunction, g_v: RateFunction, seed: int
) -> CoupledRun:
    """Internal vs lower external on shared clocks."""
    run = run_coupled(spec, g_u, g_v, seed, copies=("int", "low"))
    if run.majorant_violated:
        raise MajorantViolated(f"internal queue exceeded the majorant (seed {seed})")
    return run


def coupled_run_upp(
    spec: NetworkSpec, g_u: RateFunction, g_v: RateFunction, seed: int
) -> CoupledRun:
    """Isolated vs upper external on shared clocks.

    The coupling is defined up to the isolated pre-transition time; the
    upper external copy is driven on to its full transition afterwards.
    """
    run = run_coupled(spec, g_u, g_v, seed, copies=("iso", "upp"))
    if run.majorant_violated:
        raise MajorantViolated(f"isolated queue exceeded the majorant (seed {seed})")
    if run.tau_bars.get("iso") is not None and run.tau_bars["iso"] > spec.t_u:
        raise CouplingUndefined(
            f"isolated pre-transition beyond T_U (seed {seed})"
        )
    return run


def wilson_interval(k: int, n: int, z: float = 1.96):
    """Wilson 95% score interval for a binomial proportion."""
    if n == 0:
        return (0.0, 1.0)
    p = k / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass
class SandwichSummary:
    n: int
    n_usable: int
    p_sandwich: float
    wilson: tuple
    ordered_fraction: float
    good_fraction: float
    gap: float
    runs: list = field(default_factory=list)


def sandwich_stats(
    spec: NetworkSpec,
    g_u: RateFunction,
    g_v: RateFunction,
    n: int,
    seedbase: int,
    keep_runs: bool = False,
) -> SandwichSummary:
    """Empirical probability of tau_low <= tau_int <= tau_upp + gap.

    All four copies run on one shared clock system per seed, so the
    internal and isolated copies coincide exactly up to the internal
    pre-transition time.  gap is the negligible-gap slack 10/g_V(gamma_V r).
    """
    gap = 10.0 / g_v(spec.gamma_v * spec.r)
    hits = 0
    usable = 0
    ordered = 0
    goods = 0
    kept = []
    for k in range(n):
        seed = _replica_seed(seedbase, k)
        run = run_coupled(spec, g_u, g_v, seed, copies=("low", "int", "iso", "upp"))
        if keep_runs:
            kept.append(run)
        if run.on_good_event:
            goods += 1
        t_low, t_int, t_upp = (
            run.taus.get("low"),
            run.taus.get("int"),
            run.taus.get("upp"),
        )
        if run.majorant_violated or None in (t_low, t_int, t_upp):
            continue
        usable += 1
        if run.ordering_violations == 0:
            ordered += 1
        if t_low <= t_int <= t_upp + gap:
            hits += 1
    return SandwichSummary(
        n=n,
        n_usable=usable,
        p_sandwich=hits / usable if usable else 0.0,
        wilson=wilson_interval(hits, usable),
        ordered_fraction=ordered / usable if usable else 0.0,
        good_fraction=goods / n,
        gap=gap,
        runs=kept,
    )


def _replica_seed(seedbase: int, index: int) -> int:
    """Deterministic distinct per-replica seed."""
    return (int(seedbase) * 1_000_003 + index) & 0x7FFFFFFFFFFFFFFF
