"""Critical time scale, limit laws and the exact frozen-chain oracle."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcsma import (
    FrozenChain,
    FrozenRateZero,
    NetworkSpec,
    NoBracket,
    PowerLaw,
    PowerSlowlyVarying,
    ConstantSV,
    SlowlyVaryingOnly,
    LogPower,
    TheoryReport,
    UnsupportedRateKind,
    closed_form_Mc,
    exact_mean_hitting_time,
    limit_law_P,
    mean_tau_frozen_asymptotic,
    nu,
    simulate_frozen_chain,
    solve_Mc_numeric,
    survival_external_numeric,
)
from qcsma.harness import replica_seed


def base_spec(r=1000.0, delta=0.1):
    return NetworkSpec(2, 2, 1.0, 1.0, 1.0, 1.0, 2.0, 1.5, r, delta)


class TestExactChain:
    def test_unit_1x1_mean_is_three(self):
        assert exact_mean_hitting_time(FrozenChain(1, 1, 1.0, 1.0)) == pytest.approx(
            3.0, abs=1e-12
        )

    def test_vanishing_u_rate_limit(self):
        # with r_U -> 0 the U node never reactivates: mean time is
        # E[U off] + E[V on] = 1 + 1 = 2
        assert exact_mean_hitting_time(
            FrozenChain(1, 1, 1e-9, 1.0)
        ) == pytest.approx(2.0, rel=1e-6)

    def test_frozen_oracle_values(self):
        assert exact_mean_hitting_time(
            FrozenChain(2, 1, 10.0, 1000.0)
        ) == pytest.approx(6.620999999999991)
        assert exact_mean_hitting_time(
            FrozenChain(3, 2, 2.0, 3.0)
        ) == pytest.approx(11.833333333333341)

    def test_asymptotic_form(self):
        spec = NetworkSpec(2, 2, 1.0, 1.0, 1.0, 1.0, 2.0, 1.5, 1.0, 0.0)
        assert mean_tau_frozen_asymptotic(spec, 10.0) == pytest.approx(5.0)
        exact = exact_mean_hitting_time(FrozenChain(2, 2, 1e3, 1e9))
        assert exact / 500.0 == pytest.approx(1.0, abs=0.01)

    def test_generator_rows_sum_to_zero(self):
        q = FrozenChain(3, 2, 1.7, 0.4).generator()
        assert np.allclose(q.sum(axis=1), 0.0, atol=1e-12)
        assert q.shape == (2**3 + 2**2 - 1,) * 2

    @given(
        n_u=st.integers(1, 4),
        n_v=st.integers(1, 4),
        r_u=st.floats(0.3, 3.0),
        r_v=st.floats(0.3, 3.0),
        seed=st.integers(0, 2**20),
    )
    @settings(max_examples=12, deadline=None)
    def test_monte_carlo_matches_exact(self, n_u, n_v, r_u, r_v, seed):
        exact = exact_mean_hitting_time(FrozenChain(n_u, n_v, r_u, r_v))
        n = 4000
        taus = np.array(
            [
                simulate_frozen_chain(n_u, n_v, r_u, r_v, replica_seed(seed, k)).tau
                for k in range(n)
            ]
        )
        se = taus.std(ddof=1) / math.sqrt(n)
        assert abs(taus.mean() - exact) <= 3.0 * se


class TestCriticalScale:
    def test_subcritical_closed_form(self):
        rep = closed_form_Mc(base_spec(), PowerLaw(1.0, 0.4))
        assert rep.regime == "subcritical"
        assert rep.exponent == pytest.approx(0.4)
        assert rep.Mc == pytest.approx(0.5 * 1000.0**0.4)

    def test_critical_closed_form(self):
        rep = closed_form_Mc(base_spec(), PowerLaw(1.0, 1.0))
        assert rep.regime == "critical"
        # Fc = gamma_U / (n * G^{-(n-1)} + (c - rho_U)) = 1/3
        assert rep.Fc == pytest.approx(1.0 / 3.0)
        assert rep.C == pytest.approx(1.0 / 3.0)
        assert rep.Mc == pytest.approx(1000.0 / 3.0)

    def test_supercritical_closed_form(self):
        rep = closed_form_Mc(base_spec(), PowerLaw(1.0, 2.0))
        assert rep.regime == "supercritical"
        assert rep.Mc == pytest.approx(1000.0)
        assert rep.C == 1.0

    def test_slowly_varying_regime(self):
        rep = closed_form_Mc(base_spec(), SlowlyVaryingOnly(ConstantSV(4.0)))
        assert rep.regime == "slowly_varying"
        assert rep.Mc == pytest.approx(2.0)

    def test_numeric_matches_closed_form(self):
        spec = base_spec(r=1e6)
        for beta in (0.4, 1.0, 2.0):
            rep = closed_form_Mc(spec, PowerLaw(1.0, beta))
            num = solve_Mc_numeric(spec, PowerLaw(1.0, beta))
            assert num == pytest.approx(rep.Mc, rel=0.02)

    def test_modulated_subcritical(self):
        g = PowerSlowlyVarying(0.3, LogPower(1.0))
        rep = closed_form_Mc(base_spec(), g)
        assert rep.regime == "subcritical"
        num = solve_Mc_numeric(base_spec(r=1e6), g)
        rep6 = closed_form_Mc(base_spec(r=1e6), g)
        assert num == pytest.approx(rep6.Mc, rel=0.05)

    def test_modulated_supercritical_unsupported(self):
        with pytest.raises(UnsupportedRateKind):
            closed_form_Mc(base_spec(), PowerSlowlyVarying(2.0, LogPower(1.0)))

    def test_no_bracket_raises(self):
        # a rate so small the root leaves the bracket
        spec = NetworkSpec(2, 2, 1.0, 1.0, 1.0, 1.0, 2.0, 1.5, 1.01, 0.0)
        with pytest.raises(NoBracket):
            solve_Mc_numeric(spec, PowerLaw(1e-8, 0.1))

    def test_nu_vanishes_beyond_t_u(self):
        spec = base_spec()
        with pytest.raises(FrozenRateZero):
            nu(spec, spec.t_u + 1.0, PowerLaw(1.0, 1.0))


class TestLimitLaw:
    def test_boundary_values(self):
        sub = TheoryReport("subcritical", 1.0, 1.0, 0.4, None)
        assert limit_law_P(sub, 0.0) == 1.0
        assert limit_law_P(sub, 1.0) == pytest.approx(math.exp(-1.0))

    def test_critical_branch(self):
        crit = TheoryReport("critical", 1.0, 1.0, 1.0, 1.0 / 3.0)
        assert limit_law_P(crit, 1.0) == pytest.approx(4.0 / 9.0)
        assert limit_law_P(crit, 3.0) == 0.0
        assert limit_law_P(crit, 5.0) == 0.0

    def test_supercritical_step(self):
        sup = TheoryReport("supercritical", 1.0, 1.0, 1.0, 1.0)
        assert limit_law_P(sup, 0.5) == 1.0
        assert limit_law_P(sup, 1.5) == 0.0

    def test_rejects_negative_x(self):
        with pytest.raises(ValueError):
            limit_law_P(TheoryReport("subcritical", 1.0, 1.0, 0.4, None), -0.1)

    @given(
        x=st.floats(0.0, 10.0),
        dx=st.floats(0.0, 5.0),
        regime=st.sampled_from(["subcritical", "critical", "supercritical"]),
    )
    @settings(max_examples=200)
    def test_non_increasing_and_bounded(self, x, dx, regime):
        rep = TheoryReport(regime, 1.0, 1.0, 1.0, 0.4 if regime == "critical" else 1.0)
        p0, p1 = limit_law_P(rep, x), limit_law_P(rep, x + dx)
        assert 0.0 <= p1 <= p0 <= 1.0
        assert limit_law_P(rep, 0.0) == 1.0


class TestSurvivalIntegral:
    def test_matches_critical_closed_form(self):
        spec = base_spec()
        rep = closed_form_Mc(spec, PowerLaw(1.0, 1.0))
        got = survival_external_numeric(spec, rep.Mc, 1.0, PowerLaw(1.0, 1.0))
        assert got == pytest.approx((1.0 - 1.0 / 3.0) ** 2, abs=1e-6)

    def test_zero_beyond_rate_extinction(self):
        spec = base_spec()
        rep = closed_form_Mc(spec, PowerLaw(1.0, 1.0))
        assert survival_external_numeric(spec, rep.Mc, 4.0, PowerLaw(1.0, 1.0)) == 0.0

    def test_survival_at_zero_is_one(self):
        spec = base_spec()
        assert survival_external_numeric(spec, 100.0, 0.0, PowerLaw(1.0, 1.0)) == 1.0

    def test_matches_limit_law_large_r(self):
        spec = base_spec(r=1e6)
        for beta in (0.4, 1.0):
            g = PowerLaw(1.0, beta)
            rep = closed_form_Mc(spec, g)
            m = solve_Mc_numeric(spec, g)
            for x in (0.25, 0.5, 1.0, 1.7):
                assert survival_external_numeric(spec, m, x, g) == pytest.approx(
                    limit_law_P(rep, x), abs=1e-2
                )
