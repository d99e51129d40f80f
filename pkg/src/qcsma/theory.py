"""Closed-form transition-time asymptotics and exact frozen-chain oracles.

Implements the critical time scale (the root of M*nu(M) = 1), its
closed-form prefactor with the subcritical/critical/supercritical
trichotomy, the limit laws of tau/E[tau], the survival integral for the
external model, and an exact mean-hitting-time solver for the
constant-rate (frozen) activity chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.optimize import brentq

from .errors import (
    FrozenRateZero,
    NoBracket,
    NonpositiveConstant,
    SingularSystem,
    UnsupportedRateKind,
)
from .params import (
    DerivedConstants,
    Model,
    NetworkSpec,
    PowerLaw,
    PowerSlowlyVarying,
    RateFunction,
    SlowlyVaryingOnly,
    external_argument,
    validate,
)

__all__ = [
    "Regime",
    "TheoryReport",
    "FrozenChain",
    "mean_tau_frozen_asymptotic",
    "nu",
    "solve_Mc_numeric",
    "closed_form_Mc",
    "limit_law_P",
    "survival_external_numeric",
    "exact_mean_hitting_time",
    "deviation_constants",
]


class Regime:
    SUBCRITICAL = "subcritical"
    CRITICAL = "critical"
    SUPERCRITICAL = "supercritical"
    SLOWLY_VARYING = "slowly_varying"


@dataclass(frozen=True)
class TheoryReport:
    regime: str
    Mc: float
    Fc: float
    exponent: float
    C: float | None = None


def mean_tau_frozen_asymptotic(spec: NetworkSpec, r_u: float) -> float:
    """Leading-order mean transition time (1/|U|) * r_U^(|U|-1)."""
    if r_u <= 0:
        raise FrozenRateZero("frozen U-rate must be positive")
    return r_u ** (spec.size_u - 1) / spec.size_u


def nu(spec: NetworkSpec, s: float, g_u: RateFunction) -> float:
    """Inverse mean transition time of the model frozen at time s."""
    r_u = g_u(external_argument(Model.EXTERNAL, "U", s, spec))
    if r_u <= 0:
        raise FrozenRateZero(f"frozen U-rate vanishes at s={s}")
    return spec.size_u * r_u ** (1 - spec.size_u)


def solve_Mc_numeric(spec: NetworkSpec, g_u: RateFunction) -> float:
    """Critical time scale: the root of M*nu(M) - 1 = 0 on (0, T_U)."""

    def f(m):
        return m * nu(spec, m, g_u) - 1.0

    lo = spec.r**0.01
    hi = spec.t_u * (1.0 - 1e-6)
    if lo >= hi:
        raise NoBracket("bracket degenerate: r too small")
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        raise NoBracket(
            f"M*nu(M)-1 does not change sign on [{lo}, {hi}] "
            f"(f(lo)={flo}, f(hi)={fhi})"
        )
    return brentq(f, lo, hi, xtol=1e-300, rtol=1e-13, maxiter=300)


def closed_form_Mc(spec: NetworkSpec, g_u: RateFunction) -> TheoryReport:
    """Regime tag, prefactor and time scale from the closed-form branches."""
    n = spec.size_u
    drain = spec.c - spec.rho_u
    alpha = spec.alpha

    if isinstance(g_u, SlowlyVaryingOnly):
        mc = g_u.modulation(spec.gamma_u * spec.r) ** (n - 1) / n
        return TheoryReport(
            regime=Regime.SLOWLY_VARYING, Mc=mc, Fc=mc, exponent=0.0, C=None
        )

    if isinstance(g_u, PowerLaw):
        beta, G = g_u.beta, g_u.G
        lhat = None
    elif isinstance(g_u, PowerSlowlyVarying):
        beta, G = g_u.beta, 1.0
        lhat = g_u.modulation
    else:
        raise UnsupportedRateKind(f"no closed form for {type(g_u).__name__}")

    crit = 1.0 / (n - 1) if n > 1 else math.inf
    exponent = min(1.0, beta * (n - 1))

    if beta < crit:
        fc = spec.gamma_u ** (beta * (n - 1)) * G ** (n - 1) / n
        mc = fc * spec.r**exponent
        if lhat is not None:
            mc *= lhat(spec.gamma_u * spec.r) ** (n - 1)
        return TheoryReport(
            regime=Regime.SUBCRITICAL, Mc=mc, Fc=fc, exponent=exponent, C=None
        )
    if lhat is not None:
        raise UnsupportedRateKind(
            "slowly varying modulation is only supported in the subcritical regime"
        )
    if beta == crit:
        fc = spec.gamma_u / (n * G ** (-(n - 1)) + drain)
        c_const = fc * drain / spec.gamma_u
        return TheoryReport(
            regime=Regime.CRITICAL,
            Mc=fc * spec.r,
            Fc=fc,
            exponent=1.0,
            C=c_const,
        )
    return TheoryReport(
        regime=Regime.SUPERCRITICAL, Mc=alpha * spec.r, Fc=alpha, exponent=1.0, C=1.0
    )


def limit_law_P(report: TheoryReport, x: float) -> float:
    """Limit survival law of tau/E[tau] for the report's regime."""
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0:
        return 1.0
    if report.regime in (Regime.SUBCRITICAL, Regime.SLOWLY_VARYING):
        return math.exp(-x)
    if report.regime == Regime.CRITICAL:
        c = report.C
        if x >= 1.0 / c:
            return 0.0
        return (1.0 - c * x) ** ((1.0 - c) / c)
    # supercritical: unit step at 1
    return 1.0 if x < 1.0 else 0.0


def _adaptive_simpson(f, a, b, tol, max_depth=20):
    """Adaptive Simpson quadrature with a recursion-depth cap."""

    def simpson(fa, fm, fb, h):
        return h / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, fa, b, fb, m, fm, whole, tol, depth):
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, m - a)
        right = simpson(fm, frm, fb, b - m)
        if depth >= max_depth or abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return recurse(a, fa, m, fm, lm, flm, left, 0.5 * tol, depth + 1) + recurse(
            m, fm, b, fb, rm, frm, right, 0.5 * tol, depth + 1
        )

    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    return recurse(a, fa, b, fb, m, fm, simpson(fa, fm, fb, b - a), tol, 0)


def survival_external_numeric(
    spec: NetworkSpec, M: float, x: float, g_u: RateFunction, tol: float = 1e-8
) -> float:
    """exp(-int_0^x M*nu(M*s) ds) by adaptive quadrature.

    The integrand diverges where the frozen U-rate vanishes (s = T_U/M);
    the integral is clipped just before that point and the survival is 0
    for x at or beyond it whenever the accumulated mass is large.
    """
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0:
        return 1.0
    s_max = spec.t_u / M

    def integrand(s):
        return M * nu(spec, M * s, g_u)

    upper = min(x, s_max * (1.0 - 1e-12))
    total = _adaptive_simpson(integrand, 0.0, upper, tol)
    if x >= s_max and total < 500.0:
        # the rate vanished inside the range: survival beyond is zero
        return 0.0
    return math.exp(-total) if total < 700.0 else 0.0


# ---------------------------------------------------------------------------
# exact frozen activity chain


@dataclass(frozen=True)
class FrozenChain:
    """Hard-core activity CTMC with constant rates on a complete bipartite graph.

    States are the subsets of U together with the subsets of V (the empty
    configuration is shared), for 2^|U| + 2^|V| - 1 states in total.
    Activation rates are r_u per inactive U-node (V empty) and r_v per
    inactive V-node (U empty); deactivation rate is 1 per active node.
    """

    size_u: int
    size_v: int
    r_u: float
    r_v: float

    def states(self):
        """All states as (side, bitmask); ('U', 0) is the shared empty state."""
        out = [("U", m) for m in range(2**self.size_u)]
        out += [("V", m) for m in range(1, 2**self.size_v)]
        return out

    def generator(self) -> np.ndarray:
        states = self.states()
        index = {s: i for i, s in enumerate(states)}
        n = len(states)
        q = np.zeros((n, n))
        for (side, mask), i in index.items():
            size = self.size_u if side == "U" else self.size_v
            rate = self.r_u if side == "U" else self.r_v
            for b in range(size):
                bit = 1 << b
                if mask & bit:
                    tgt = (side, mask ^ bit)
                    if tgt == ("V", 0):
                        tgt = ("U", 0)
                    q[i, index[tgt]] += 1.0
                else:
                    q[i, index[(side, mask | bit)]] += rate
            if mask == 0 and side == "U":
                # empty configuration can also grow on the V side
                for b in range(self.size_v):
                    q[i, index[("V", 1 << b)]] += self.r_v
        np.fill_diagonal(q, -q.sum(axis=1))
        return q


def exact_mean_hitting_time(chain: FrozenChain) -> float:
    """Mean hitting time of the all-V-active state from the all-U-active state.

    Solves (-Q restricted off the target) h = 1 with h(target) = 0.
    """
    states = chain.states()
    index = {s: i for i, s in enumerate(states)}
    start = index[("U", 2**chain.size_u - 1)]
    target = index[("V", 2**chain.size_v - 1)]
    q = chain.generator()
    keep = [i for i in range(len(states)) if i != target]
    a = -q[np.ix_(keep, keep)]
    b = np.ones(len(keep))
    try:
        lu = lu_factor(a)
        h = lu_solve(lu, b)
    except Exception as exc:  # singular factorization
        raise SingularSystem(str(exc)) from exc
    if not np.all(np.isfinite(h)):
        raise SingularSystem("hitting-time system produced non-finite values")
    resid = np.max(np.abs(a @ h - b)) / max(1.0, np.max(np.abs(h)))
    if resid > 1e-8:
        raise SingularSystem(f"linear solve residual too large: {resid}")
    return float(h[keep.index(start)])


def deviation_constants(
    spec: NetworkSpec, eps1: float | None = None, eps2: float | None = None
) -> DerivedConstants:
    """Derived constants including K_delta and K1..K4 for given eps inputs."""
    dc = validate(spec, eps1=eps1, eps2=eps2)
    if spec.delta > 0:
        for name in ("k1", "k2", "k3", "k4"):
            if getattr(dc, name) <= 0:
                raise NonpositiveConstant(f"{name} is non-positive")
    return dc
