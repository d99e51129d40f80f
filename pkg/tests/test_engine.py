"""Event-driven simulator: thinning, trajectories, tubes, determinism."""

import math

import numpy as np
import pytest

from qcsma import (
    Frozen,
    InsufficientSamples,
    Model,
    NetworkSpec,
    PowerLaw,
    Tabulated,
    check_good_behavior,
    input_tube_exit_frequency,
    next_inhomogeneous_arrival,
    simulate_frozen_chain,
    simulate_run,
)
from qcsma.harness import replica_seed


def base_spec(r=500.0, delta=0.1):
    return NetworkSpec(2, 2, 1.0, 1.0, 1.0, 1.0, 2.0, 1.5, r, delta)


G_U = PowerLaw(1.0, 1.0)
G_V = PowerLaw(1.0, 1.5)


class TestThinning:
    def test_constant_rate_mean(self):
        rng = np.random.default_rng(1)
        draws = [
            next_inhomogeneous_arrival(lambda t: 2.0, 0.0, "decreasing", rng)
            for _ in range(20000)
        ]
        assert np.mean(draws) == pytest.approx(0.5, abs=0.01)

    def test_increasing_linear_rate_median(self):
        # intensity t gives survival exp(-t^2/2): median sqrt(2 ln 2)
        rng = np.random.default_rng(2)
        draws = [
            next_inhomogeneous_arrival(lambda t: t, 0.0, "increasing", rng)
            for _ in range(20000)
        ]
        assert np.median(draws) == pytest.approx(math.sqrt(2.0 * math.log(2.0)), abs=0.02)

    def test_decreasing_exponential_rate_defect(self):
        # intensity e^{-t} never fires with probability e^{-1}
        rng = np.random.default_rng(3)
        draws = [
            next_inhomogeneous_arrival(lambda t: math.exp(-t), 0.0, "decreasing", rng)
            for _ in range(20000)
        ]
        frac_inf = np.mean([math.isinf(d) for d in draws])
        assert frac_inf == pytest.approx(math.exp(-1.0), abs=0.015)

    def test_zero_rate_never_fires(self):
        rng = np.random.default_rng(4)
        assert next_inhomogeneous_arrival(
            lambda t: 0.0, 0.0, "decreasing", rng
        ) == math.inf

    def test_t_end_respected(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            d = next_inhomogeneous_arrival(
                lambda t: 5.0, 1.0, "increasing", rng, t_end=1.5
            )
            assert d == math.inf or 1.0 < d < 1.5


class TestDeterminism:
    @pytest.mark.parametrize(
        "model", [Model.INTERNAL, Model.EXTERNAL, Model.LOWER, Model.ISOLATED]
    )
    def test_same_seed_same_path(self, model):
        spec = base_spec()
        a = simulate_run(spec, model, G_U, G_V, seed=99, sample_dt=25.0)
        b = simulate_run(spec, model, G_U, G_V, seed=99, sample_dt=25.0)
        assert a.report.tau == b.report.tau
        assert a.report.tau_bar == b.report.tau_bar
        assert np.array_equal(a.times, b.times)
        assert np.array_equal(a.queues, b.queues)

    def test_different_seeds_differ(self):
        spec = base_spec()
        a = simulate_run(spec, Model.INTERNAL, G_U, G_V, seed=1)
        b = simulate_run(spec, Model.INTERNAL, G_U, G_V, seed=2)
        assert a.report.tau != b.report.tau


class TestPathInvariants:
    def test_hard_core_constraint_sampled(self):
        spec = base_spec()
        traj = simulate_run(
            spec, Model.INTERNAL, G_U, G_V, seed=5, sample_dt=5.0, run_to_horizon=True
        )
        u_on = traj.active[:, : spec.size_u].any(axis=1)
        v_on = traj.active[:, spec.size_u :].any(axis=1)
        assert not np.any(u_on & v_on)

    def test_queues_nonnegative(self):
        spec = base_spec(r=50.0)
        traj = simulate_run(
            spec, Model.INTERNAL, G_U, G_V, seed=6, sample_dt=2.0, run_to_horizon=True
        )
        assert np.all(traj.queues >= -1e-9)

    def test_starts_all_u_active(self):
        spec = base_spec()
        traj = simulate_run(spec, Model.INTERNAL, G_U, G_V, seed=7, sample_dt=50.0)
        assert np.all(traj.active[0, : spec.size_u] == 1)
        assert np.all(traj.active[0, spec.size_u :] == 0)
        assert np.allclose(traj.queues[0], spec.gamma_u * spec.r)

    def test_tau_bar_precedes_tau(self):
        spec = base_spec()
        for seed in range(20):
            rep = simulate_run(spec, Model.INTERNAL, G_U, G_V, seed=seed).report
            if rep.tau is not None:
                assert rep.tau_bar is not None
                assert rep.tau_bar <= rep.tau

    def test_upper_model_capped_at_t_u(self):
        spec = base_spec()
        traj = simulate_run(spec, Model.UPPER, G_U, G_V, seed=8, horizon_mult=10.0)
        assert traj.report.horizon <= spec.t_u + 1e-9
        if traj.report.tau is not None:
            assert traj.report.tau <= spec.t_u

    def test_isolated_v_queues_never_drain(self):
        # V nodes may activate but serve nothing in the isolated model
        spec = base_spec()
        traj = simulate_run(
            spec, Model.ISOLATED, G_U, G_V, seed=9, sample_dt=5.0,
            run_to_horizon=True,
        )
        qv = traj.queues[:, spec.size_u :]
        assert np.all(np.diff(qv, axis=0) >= -1e-9)
        assert np.all(qv >= spec.gamma_v * spec.r - 1e-9)

    def test_internal_isolated_coincide(self):
        spec = base_spec()
        for seed in range(50):
            a = simulate_run(spec, Model.INTERNAL, G_U, G_V, seed=seed).report
            b = simulate_run(spec, Model.ISOLATED, G_U, G_V, seed=seed).report
            if a.tau_bar is not None and b.tau_bar is not None:
                assert a.tau_bar == b.tau_bar

    def test_report_json_round_trip(self):
        spec = base_spec()
        rep = simulate_run(spec, Model.INTERNAL, G_U, G_V, seed=10).report
        d = rep.to_json_dict()
        assert d["seed"] == 10
        assert d["censored"] == (rep.tau is None)
        assert set(d) == {"tau_bar", "tau", "censored", "good_behavior", "seed", "model"}


class TestFrozenModel:
    def test_frozen_run_matches_exact_mean(self):
        # 1x1 with unit rates on both sides: exact mean is 3
        spec = NetworkSpec(1, 1, 1.0, 1.0, 1.0, 1.0, 2.0, 1.5, 1.0, 0.0)
        g = Tabulated(((1.0, 1.0), (100.0, 1.0)))
        taus = []
        for k in range(3000):
            rep = simulate_run(
                spec, Frozen(0.0), g, g, replica_seed(17, k), horizon_mult=1e6
            ).report
            taus.append(rep.tau)
        se = np.std(taus, ddof=1) / math.sqrt(len(taus))
        assert np.mean(taus) == pytest.approx(3.0, abs=3.0 * se)

    def test_chain_simulator_matches_exact_mean(self):
        taus = [
            simulate_frozen_chain(2, 2, 1.5, 2.0, replica_seed(23, k)).tau
            for k in range(4000)
        ]
        se = np.std(taus, ddof=1) / math.sqrt(len(taus))
        from qcsma import FrozenChain, exact_mean_hitting_time

        exact = exact_mean_hitting_time(FrozenChain(2, 2, 1.5, 2.0))
        assert np.mean(taus) == pytest.approx(exact, abs=3.0 * se)

    def test_chain_horizon_censors(self):
        rep = simulate_frozen_chain(3, 3, 0.5, 0.5, 1, horizon=0.01)
        assert rep.tau is None


class TestTubes:
    def test_good_behavior_requires_samples(self):
        spec = base_spec()
        traj = simulate_run(spec, Model.INTERNAL, G_U, G_V, seed=11)
        with pytest.raises(InsufficientSamples):
            check_good_behavior(traj, spec)

    def test_good_behavior_rejects_coarse_grid(self):
        spec = base_spec(delta=0.1)
        # max allowed sample_dt is delta*r/(4c)
        traj = simulate_run(
            spec, Model.INTERNAL, G_U, G_V, seed=12,
            sample_dt=spec.delta * spec.r / (4.0 * spec.c) * 2.0,
        )
        with pytest.raises(InsufficientSamples):
            check_good_behavior(traj, spec)

    def test_good_behavior_typical_run(self):
        spec = base_spec(r=2000.0, delta=0.1)
        good = 0
        for seed in range(20):
            traj = simulate_run(
                spec, Model.INTERNAL, G_U, G_V, seed=seed, sample_dt=30.0
            )
            per_node, ok = check_good_behavior(traj, spec)
            assert len(per_node) == 4
            good += ok
        assert good >= 18

    def test_input_tube_rare_exit(self):
        spec = NetworkSpec(1, 1, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 100.0, 0.5)
        freq = input_tube_exit_frequency(spec, "U", 200.0, 2000, 31)
        assert freq <= math.exp(-0.0505 * 200.0 / 2.0)

    def test_input_tube_tight_band_exits_often(self):
        spec = NetworkSpec(1, 1, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 100.0, 0.01)
        freq = input_tube_exit_frequency(spec, "U", 200.0, 500, 32)
        assert freq > 0.5
