"""Exact event-driven simulation of the six model kinds.

The internal and isolated models are simulated with competing
exponentials redrawn after every event (between events every hazard is
constant: inactive queues only jump at arrivals, active queues drain
deterministically, deactivation is unit-rate).  The externally driven
models use exact thinning of their inhomogeneous activation rates.
Activation attempts that are blocked by the opposite side are no-ops and
are never scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientSamples
from .params import (
    Frozen,
    Model,
    ModelKind,
    NetworkSpec,
    RateFunction,
    external_argument,
)

__all__ = [
    "TransitionReport",
    "EventRecord",
    "Trajectory",
    "simulate_run",
    "simulate_frozen_chain",
    "next_inhomogeneous_arrival",
    "check_good_behavior",
    "input_tube_exit_frequency",
]


# ---------------------------------------------------------------------------
# records


@dataclass(frozen=True)
class TransitionReport:
    tau_bar: float | None  # None means censored at the horizon
    tau: float | None
    horizon: float
    seed: int
    model: str
    good_behavior: bool | None = None

    @property
    def censored(self) -> bool:
        return self.tau is None

    def to_json_dict(self) -> dict:
        return {
            "tau_bar": self.tau_bar,
            "tau": self.tau,
            "censored": self.censored,
            "good_behavior": self.good_behavior,
            "seed": self.seed,
            "model": self.model,
        }


@dataclass(frozen=True)
class EventRecord:
    time: float
    node: int
    kind: str  # arrival | activation | deactivation | queue_zero
    size: float | None = None


@dataclass
class Trajectory:
    spec: NetworkSpec
    model: str
    sample_dt: float | None
    times: np.ndarray  # (n_samples,)
    queues: np.ndarray  # (n_samples, n_nodes)
    active: np.ndarray  # (n_samples, n_nodes), 0/1
    report: TransitionReport
    active_time: np.ndarray  # cumulative T_i at end of run
    activity_periods: np.ndarray  # completed activity periods M_i
    drained: np.ndarray  # cumulative drained work per node
    end_time: float
    events: list[EventRecord] | None = None

    @property
    def n_nodes(self) -> int:
        return self.spec.size_u + self.spec.size_v

    def sides(self):
        return ["U"] * self.spec.size_u + ["V"] * self.spec.size_v


# ---------------------------------------------------------------------------
# inhomogeneous Poisson sampling by thinning


def next_inhomogeneous_arrival(
    rate_fn,
    t0: float,
    monotonicity: str,
    rng: np.random.Generator,
    t_end: float = math.inf,
) -> float:
    """First point after t0 of a Poisson process with intensity rate_fn.

    monotonicity is "decreasing" or "increasing" and must describe
    rate_fn truthfully; the draw is exact (thinning with a majorant that
    is refreshed as the position advances).  Returns math.inf if no point
    occurs before t_end or the rate is identically zero beyond t0.
    """
    if monotonicity == "decreasing":
        m = rate_fn(t0)
        t = t0
        while True:
            if m <= 0.0:
                return math.inf
            t += rng.exponential() / m
            if t >= t_end:
                return math.inf
            lam = rate_fn(t)
            if lam >= m or rng.random() * m < lam:
                return t
            m = lam
    if monotonicity != "increasing":
        raise ValueError("monotonicity must be 'increasing' or 'decreasing'")

    t = t0
    while t < t_end:
        lam0 = rate_fn(t)
        if lam0 <= 0.0:
            # rate is non-decreasing: scan forward for the first positive value
            h = 1.0 if not math.isfinite(t_end) else max((t_end - t) * 0.01, 1e-9)
            while t + h < t_end and rate_fn(t + h) <= 0.0:
                t += h
                h *= 2.0
            if t + h >= t_end:
                if rate_fn(t_end) <= 0.0:
                    return math.inf
                h = t_end - t
            lam0 = rate_fn(t + h)
            if lam0 <= 0.0:
                return math.inf
            seg_end = t + h
        else:
            # segment sized so the majorant exceeds the minimum by <= 10%
            h = (t_end - t) if math.isfinite(t_end) else max(abs(t), 1.0)
            while h > 1e-12 * max(1.0, abs(t)) and rate_fn(t + h) > 1.1 * lam0:
                h *= 0.5
            seg_end = t + h
        m = rate_fn(seg_end)
        if m <= 0.0:
            t = seg_end
            continue
        s = t
        while True:
            s += rng.exponential() / m
            if s >= seg_end:
                t = seg_end
                break
            if rng.random() * m < rate_fn(s):
                return s
    return math.inf


# ---------------------------------------------------------------------------
# rate helpers for the externally driven models


def _side_rate_fn(model: ModelKind, side: str, spec: NetworkSpec, g: RateFunction):
    """Per-node activation hazard as a function of absolute time."""
    if isinstance(model, Frozen):
        const = g(external_argument(Model.EXTERNAL, side, model.s, spec))
        return (lambda t: const), "constant"
    fn = lambda t: g(external_argument(model, side, t, spec))  # noqa: E731
    return fn, ("decreasing" if side == "U" else "increasing")


# ---------------------------------------------------------------------------
# sampling buffer


class _Sampler:
    def __init__(self, n_nodes, sample_dt):
        self.sample_dt = sample_dt
        self.next_t = 0.0
        self.times = []
        self.queues = []
        self.active = []
        self.n_nodes = n_nodes

    def emit_until(self, t_next, t_cur, q, drain, active):
        """Record snapshots at grid times in [next_t, t_next]."""
        if self.sample_dt is None:
            return
        while self.next_t <= t_next + 1e-12:
            s = self.next_t
            dt = s - t_cur
            row = [max(q[i] - drain[i] * dt, 0.0) for i in range(self.n_nodes)]
            self.times.append(s)
            self.queues.append(row)
            self.active.append(list(active))
            self.next_t += self.sample_dt

    def arrays(self):
        if self.sample_dt is None:
            return (np.zeros(0), np.zeros((0, self.n_nodes)), np.zeros((0, self.n_nodes), dtype=np.int8))
        return (
            np.array(self.times),
            np.array(self.queues),
            np.array(self.active, dtype=np.int8),
        )


# ---------------------------------------------------------------------------
# main entry point


def simulate_run(
    spec: NetworkSpec,
    model: ModelKind,
    g_u: RateFunction,
    g_v: RateFunction,
    seed: int,
    horizon_mult: float = 3.0,
    sample_dt: float | None = None,
    record_events: bool = False,
    run_to_horizon: bool = False,
) -> Trajectory:
    """Exact sample path started from all-U-active with queues gamma*r.

    The run stops at the transition time unless run_to_horizon is set.
    The upper external model is hard-capped at its defining horizon T_U.
    Identical inputs (including seed) give bit-identical trajectories.
    """
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    horizon = horizon_mult * spec.t_u
    if model is Model.UPPER:
        horizon = min(horizon, spec.t_u)
    if model in (Model.INTERNAL, Model.ISOLATED):
        return _run_queue_driven(
            spec, model, g_u, g_v, rng, seed, horizon, sample_dt,
            record_events, run_to_horizon,
        )
    return _run_external(
        spec, model, g_u, g_v, rng, seed, horizon, sample_dt,
        record_events, run_to_horizon,
    )


def _initial_state(spec: NetworkSpec):
    n_u, n_v = spec.size_u, spec.size_v
    n = n_u + n_v
    active = [True] * n_u + [False] * n_v
    q = [spec.gamma_u * spec.r] * n_u + [spec.gamma_v * spec.r] * n_v
    return n_u, n_v, n, active, q


def _run_queue_driven(
    spec, model, g_u, g_v, rng, seed, horizon, sample_dt, record_events,
    run_to_horizon,
):
    """Internal and isolated models: all hazards constant between events."""
    n_u, n_v, n, active, q = _initial_state(spec)
    isolated = model is Model.ISOLATED
    c = spec.c
    lam = [spec.lambda_u] * n_u + [spec.lambda_v] * n_v
    inv_mu = 1.0 / spec.mu
    t = 0.0
    tau_bar = None
    tau = None
    next_arrival = [rng.exponential() / lam[i] for i in range(n)]
    act_time = [0.0] * n
    drained = [0.0] * n
    periods = [0] * n
    events = [] if record_events else None
    sampler = _Sampler(n, sample_dt)

    while t < horizon:
        n_act_u = sum(active[:n_u])
        n_act_v = sum(active[n_u:])
        # drain rates: V-nodes have zero output in the isolated model
        drain = [0.0] * n
        for i in range(n):
            if active[i]:
                drain[i] = 0.0 if (isolated and i >= n_u) else c

        # competing constant hazards
        rates = []
        total = float(n_act_u + n_act_v)  # unit-rate deactivations
        for i in range(n):
            if active[i]:
                continue
            if i < n_u:
                blocked = (not isolated) and n_act_v > 0
                hz = 0.0 if blocked else g_u(q[i])
            else:
                hz = 0.0 if n_act_u > 0 else g_v(q[i])
            if hz > 0.0:
                rates.append((hz, i))
                total += hz

        t_exp = t + rng.exponential() / total if total > 0.0 else math.inf
        t_arr = math.inf
        arr_i = -1
        for i in range(n):
            if next_arrival[i] < t_arr:
                t_arr = next_arrival[i]
                arr_i = i
        t_zero = math.inf
        zero_i = -1
        for i in range(n):
            if drain[i] > 0.0:
                tz = t + q[i] / drain[i]
                if tz < t_zero:
                    t_zero = tz
                    zero_i = i

        t_next = min(t_exp, t_arr, t_zero, horizon)
        sampler.emit_until(min(t_next, horizon), t, q, drain, active)

        # advance continuous state
        dt = t_next - t
        for i in range(n):
            if active[i]:
                act_time[i] += dt
                if drain[i] > 0.0:
                    dq = drain[i] * dt
                    q[i] = max(q[i] - dq, 0.0)
                    drained[i] += dq
        t = t_next
        if t >= horizon:
            break

        # fixed precedence on float ties: arrival, queue-zero, exponential
        if t == t_arr:
            size = rng.exponential() * inv_mu
            q[arr_i] += size
            next_arrival[arr_i] = t + rng.exponential() / lam[arr_i]
            if events is not None:
                events.append(EventRecord(t, arr_i, "arrival", size))
            continue
        if t == t_zero:
            q[zero_i] = 0.0
            active[zero_i] = False
            periods[zero_i] += 1
            if events is not None:
                events.append(EventRecord(t, zero_i, "queue_zero"))
        else:
            # exponential event: pick category proportionally
            u = rng.random() * total
            acc = float(n_act_u + n_act_v)
            if u < acc:
                # deactivation of one uniformly chosen active node
                k = int(u / 1.0)  # active nodes all have rate 1
                idx = -1
                cnt = -1
                for i in range(n):
                    if active[i]:
                        cnt += 1
                        if cnt == k:
                            idx = i
                            break
                active[idx] = False
                periods[idx] += 1
                if events is not None:
                    events.append(EventRecord(t, idx, "deactivation"))
            else:
                idx = rates[-1][1]
                for hz, i in rates:
                    acc += hz
                    if u < acc:
                        idx = i
                        break
                active[idx] = True
                if events is not None:
                    events.append(EventRecord(t, idx, "activation"))
                if idx >= n_u and tau_bar is None:
                    tau_bar = t

        # transition detection
        if (
            tau is None
            and tau_bar is not None
            and sum(active[n_u:]) == n_v
            and sum(active[:n_u]) == 0
        ):
            tau = t
            if not run_to_horizon:
                break

    report = TransitionReport(
        tau_bar=tau_bar, tau=tau, horizon=horizon, seed=seed, model=_model_name(model)
    )
    times, queues, act = sampler.arrays()
    return Trajectory(
        spec=spec,
        model=_model_name(model),
        sample_dt=sample_dt,
        times=times,
        queues=queues,
        active=act,
        report=report,
        active_time=np.array(act_time),
        activity_periods=np.array(periods),
        drained=np.array(drained),
        end_time=t,
        events=events,
    )


def _run_external(
    spec, model, g_u, g_v, rng, seed, horizon, sample_dt, record_events,
    run_to_horizon,
):
    """External, lower, upper and frozen models: deterministic hazards.

    Queues do not influence the dynamics here; they are simulated (with
    their arrival streams) only when trajectory sampling or event
    recording is requested.
    """
    n_u, n_v, n, active, q = _initial_state(spec)
    c = spec.c
    track_queues = sample_dt is not None or record_events
    lam = [spec.lambda_u] * n_u + [spec.lambda_v] * n_v
    inv_mu = 1.0 / spec.mu
    rate_u, mono_u = _side_rate_fn(model, "U", spec, g_u)
    rate_v, mono_v = _side_rate_fn(model, "V", spec, g_v)
    t = 0.0
    tau_bar = None
    tau = None
    next_arrival = (
        [rng.exponential() / lam[i] for i in range(n)] if track_queues else None
    )
    act_time = [0.0] * n
    drained = [0.0] * n
    periods = [0] * n
    events = [] if record_events else None
    sampler = _Sampler(n, sample_dt)

    while t < horizon:
        n_act_u = sum(active[:n_u])
        n_act_v = sum(active[n_u:])
        n_act = n_act_u + n_act_v
        drain = [c if active[i] else 0.0 for i in range(n)]

        t_deact = t + rng.exponential() / n_act if n_act > 0 else math.inf

        k_u = n_u - n_act_u
        t_act_u = math.inf
        if k_u > 0 and n_act_v == 0:
            if mono_u == "constant":
                ru = rate_u(t)
                t_act_u = t + rng.exponential() / (k_u * ru) if ru > 0 else math.inf
            else:
                t_act_u = next_inhomogeneous_arrival(
                    lambda s: k_u * rate_u(s), t, mono_u, rng, horizon
                )
        k_v = n_v - n_act_v
        t_act_v = math.inf
        if k_v > 0 and n_act_u == 0:
            if mono_v == "constant":
                rv = rate_v(t)
                t_act_v = t + rng.exponential() / (k_v * rv) if rv > 0 else math.inf
            else:
                t_act_v = next_inhomogeneous_arrival(
                    lambda s: k_v * rate_v(s), t, mono_v, rng, horizon
                )

        t_arr = math.inf
        arr_i = -1
        if track_queues:
            for i in range(n):
                if next_arrival[i] < t_arr:
                    t_arr = next_arrival[i]
                    arr_i = i

        t_next = min(t_deact, t_act_u, t_act_v, t_arr, horizon)
        sampler.emit_until(min(t_next, horizon), t, q, drain, active)

        dt = t_next - t
        for i in range(n):
            if active[i]:
                act_time[i] += dt
                if track_queues:
                    dq = min(drain[i] * dt, q[i])
                    q[i] -= dq
                    drained[i] += dq
        t = t_next
        if t >= horizon:
            break

        if t == t_arr:
            size = rng.exponential() * inv_mu
            q[arr_i] += size
            next_arrival[arr_i] = t + rng.exponential() / lam[arr_i]
            if events is not None:
                events.append(EventRecord(t, arr_i, "arrival", size))
            continue
        if t == t_deact:
            k = int(rng.random() * n_act)
            idx = -1
            cnt = -1
            for i in range(n):
                if active[i]:
                    cnt += 1
                    if cnt == k:
                        idx = i
                        break
            active[idx] = False
            periods[idx] += 1
            if events is not None:
                events.append(EventRecord(t, idx, "deactivation"))
        elif t == t_act_u:
            k = int(rng.random() * k_u)
            idx = -1
            cnt = -1
            for i in range(n_u):
                if not active[i]:
                    cnt += 1
                    if cnt == k:
                        idx = i
                        break
            active[idx] = True
            if events is not None:
                events.append(EventRecord(t, idx, "activation"))
        else:
            k = int(rng.random() * k_v)
            idx = -1
            cnt = -1
            for i in range(n_u, n):
                if not active[i]:
                    cnt += 1
                    if cnt == k:
                        idx = i
                        break
            active[idx] = True
            if tau_bar is None:
                tau_bar = t
            if events is not None:
                events.append(EventRecord(t, idx, "activation"))

        if (
            tau is None
            and tau_bar is not None
            and sum(active[n_u:]) == n_v
            and sum(active[:n_u]) == 0
        ):
            tau = t
            if not run_to_horizon:
                break

    report = TransitionReport(
        tau_bar=tau_bar, tau=tau, horizon=horizon, seed=seed, model=_model_name(model)
    )
    times, queues, act = sampler.arrays()
    return Trajectory(
        spec=spec,
        model=_model_name(model),
        sample_dt=sample_dt,
        times=times,
        queues=queues,
        active=act,
        report=report,
        active_time=np.array(act_time),
        activity_periods=np.array(periods),
        drained=np.array(drained),
        end_time=t,
        events=events,
    )


def _model_name(model: ModelKind) -> str:
    if isinstance(model, Frozen):
        return f"frozen@{model.s!r}"
    return model.value


# ---------------------------------------------------------------------------
# constant-rate frozen chain, arbitrary rates


def simulate_frozen_chain(
    n_u: int,
    n_v: int,
    r_u: float,
    r_v: float,
    seed: int,
    horizon: float = math.inf,
) -> TransitionReport:
    """Activity-only simulation of the constant-rate hard-core chain.

    Starts from all-U-active and runs until the all-V-active state or the
    horizon.  This is the Monte Carlo counterpart of the exact linear
    solve on the frozen chain.
    """
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    active_u = n_u
    active_v = 0
    t = 0.0
    tau_bar = None
    while t < horizon:
        n_act = active_u + active_v
        total = float(n_act)
        rate_au = r_u * (n_u - active_u) if active_v == 0 else 0.0
        rate_av = r_v * (n_v - active_v) if active_u == 0 else 0.0
        total += rate_au + rate_av
        if total <= 0.0:
            return TransitionReport(None, None, horizon, seed, "frozen")
        t += rng.exponential() / total
        if t >= horizon:
            break
        u = rng.random() * total
        if u < n_act:
            if u < active_u:
                active_u -= 1
            else:
                active_v -= 1
        elif u < n_act + rate_au:
            active_u += 1
        else:
            active_v += 1
            if tau_bar is None:
                tau_bar = t
        if active_v == n_v and active_u == 0:
            return TransitionReport(tau_bar, t, horizon, seed, "frozen")
    return TransitionReport(tau_bar, None, horizon, seed, "frozen")


# ---------------------------------------------------------------------------
# good-behavior tube and input tube


def check_good_behavior(traj: Trajectory, spec: NetworkSpec):
    """Per-node tube check over [0, T_U] plus the all-node aggregate.

    The aggregate is the intersection over nodes: every queue path must
    lie inside its affine tube at every sampled time up to T_U.
    """
    if traj.sample_dt is None:
        raise InsufficientSamples("trajectory carries no snapshots")
    max_dt = spec.delta * spec.r / (4.0 * spec.c)
    if traj.sample_dt > max_dt:
        raise InsufficientSamples(
            f"sample_dt={traj.sample_dt} too coarse to certify the tube "
            f"(need <= {max_dt})"
        )
    n_u = spec.size_u
    dr = spec.delta * spec.r
    mask = traj.times <= spec.t_u + 1e-9
    ts = traj.times[mask]
    qs = traj.queues[mask]
    per_node = []
    for i in range(traj.n_nodes):
        qi = qs[:, i]
        if i < n_u:
            center = spec.gamma_u * spec.r - (spec.c - spec.rho_u) * ts
            ok = np.all((qi >= center - dr) & (qi <= center + 2.0 * dr))
        else:
            center = spec.gamma_v * spec.r + spec.rho_v * ts
            ok = np.all((qi >= center - dr) & (qi <= center + dr))
        per_node.append(bool(ok))
    return per_node, all(per_node)


def input_tube_exit_frequency(
    spec: NetworkSpec, side: str, S: float, n: int, seedbase: int
) -> float:
    """Fraction of compound-Poisson input paths leaving (lambda/mu)s +- delta*S."""
    lam = spec.lambda_u if side == "U" else spec.lambda_v
    rho = lam / spec.mu
    half = spec.delta * S
    rng = np.random.default_rng(np.random.SeedSequence([int(seedbase), 0x71BE]))
    exits = 0
    for _ in range(n):
        k = rng.poisson(lam * S)
        if k == 0:
            # path is identically 0; the lower edge rho*s - half can exceed it
            exits += 1 if rho * S - half > 0 else 0
            continue
        times = np.sort(rng.uniform(0.0, S, k))
        sizes = rng.exponential(1.0 / spec.mu, k)
        cum = np.cumsum(sizes)
        # largest upward gap occurs right after a jump, downward right before
        upper = np.max(cum - rho * times)
        below = np.concatenate(([0.0], cum[:-1]))
        lower_mid = np.max(rho * times - below)
        lower_end = rho * S - cum[-1]
        if upper >= half or lower_mid >= half or lower_end >= half:
            exits += 1
    return exits / n
