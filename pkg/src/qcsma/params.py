"""Model parameters, activation-rate functions and derived constants.

The network is a complete bipartite conflict graph on node sets U and V:
a node may be active only while the opposite side is fully inactive.
Activation rates are built from non-decreasing functions that vanish on
the non-positive half-line and diverge at infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence, Union

from .errors import (
    HorizonExceeded,
    InvalidSpec,
    NonpositiveConstant,
    TabulatedOutOfRange,
    UnsupportedRateKind,
)

__all__ = [
    "SlowlyVarying",
    "LogPower",
    "ConstantSV",
    "RateFunction",
    "PowerLaw",
    "PowerSlowlyVarying",
    "SlowlyVaryingOnly",
    "Tabulated",
    "Model",
    "Frozen",
    "ModelKind",
    "NetworkSpec",
    "DerivedConstants",
    "validate",
    "activation_rate",
    "k_delta",
]


# ---------------------------------------------------------------------------
# slowly varying modulations


class SlowlyVarying:
    """Base for slowly varying modulations: L(ax)/L(x) -> 1 as x -> inf."""

    def __call__(self, x: float) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class LogPower(SlowlyVarying):
    """(log(1+x))^exponent for x > 0, zero otherwise."""

    exponent: float

    def __post_init__(self):
        if self.exponent <= 0:
            raise InvalidSpec("LogPower exponent must be positive")

    def __call__(self, x: float) -> float:
        if x <= 0:
            return 0.0
        return math.log1p(x) ** self.exponent


@dataclass(frozen=True)
class ConstantSV(SlowlyVarying):
    value: float

    def __post_init__(self):
        if self.value <= 0:
            raise InvalidSpec("constant modulation must be positive")

    def __call__(self, x: float) -> float:
        return self.value if x > 0 else 0.0


# ---------------------------------------------------------------------------
# rate functions


class RateFunction:
    """Non-decreasing activation-rate function, zero on (-inf, 0]."""

    def __call__(self, x: float) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class PowerLaw(RateFunction):
    """g(x) = G * x**beta for x > 0."""

    G: float
    beta: float

    def __post_init__(self):
        if self.G <= 0 or self.beta <= 0:
            raise InvalidSpec("PowerLaw requires G > 0 and beta > 0")

    def __call__(self, x: float) -> float:
        if x <= 0:
            return 0.0
        return self.G * x**self.beta


@dataclass(frozen=True)
class PowerSlowlyVarying(RateFunction):
    """g(x) = x**beta * L(x) with L slowly varying."""

    beta: float
    modulation: SlowlyVarying

    def __post_init__(self):
        if self.beta <= 0:
            raise InvalidSpec("PowerSlowlyVarying requires beta > 0")

    def __call__(self, x: float) -> float:
        if x <= 0:
            return 0.0
        return x**self.beta * self.modulation(x)


@dataclass(frozen=True)
class SlowlyVaryingOnly(RateFunction):
    """g(x) = L(x), the beta = 0 case."""

    modulation: SlowlyVarying

    def __call__(self, x: float) -> float:
        if x <= 0:
            return 0.0
        return self.modulation(x)


@dataclass(frozen=True)
class Tabulated(RateFunction):
    """Piecewise-linear interpolation through sorted (x, value) breakpoints.

    Linear interpolation keeps the function globally Lipschitz.
    Extrapolation beyond the last breakpoint is forbidden.
    """

    breakpoints: tuple

    def __post_init__(self):
        pts = tuple((float(x), float(v)) for x, v in self.breakpoints)
        object.__setattr__(self, "breakpoints", pts)
        xs = [p[0] for p in pts]
        vs = [p[1] for p in pts]
        if len(pts) < 2:
            raise InvalidSpec("Tabulated needs at least two breakpoints")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise InvalidSpec("Tabulated breakpoints must be strictly increasing")
        if any(b < a for a, b in zip(vs, vs[1:])):
            raise InvalidSpec("Tabulated values must be non-decreasing")
        if any(v < 0 for v in vs):
            raise InvalidSpec("Tabulated values must be non-negative")

    def __call__(self, x: float) -> float:
        if x <= 0:
            return 0.0
        pts = self.breakpoints
        if x > pts[-1][0]:
            raise TabulatedOutOfRange(
                f"x={x} beyond tabulated domain (max {pts[-1][0]})"
            )
        if x <= pts[0][0]:
            # below the first breakpoint: interpolate from g(0) = 0
            x0, v0 = (0.0, 0.0)
            x1, v1 = pts[0]
        else:
            for (x0, v0), (x1, v1) in zip(pts, pts[1:]):
                if x <= x1:
                    break
        return v0 + (v1 - v0) * (x - x0) / (x1 - x0)


# ---------------------------------------------------------------------------
# model kinds


class Model(str, Enum):
    INTERNAL = "internal"
    EXTERNAL = "external"
    LOWER = "lower"
    UPPER = "upper"
    ISOLATED = "isolated"


@dataclass(frozen=True)
class Frozen:
    """Time-homogeneous model with the external rates frozen at time s."""

    s: float = 0.0


ModelKind = Union[Model, Frozen]


# ---------------------------------------------------------------------------
# network spec and derived constants


@dataclass(frozen=True)
class NetworkSpec:
    size_u: int
    size_v: int
    gamma_u: float
    gamma_v: float
    lambda_u: float
    lambda_v: float
    mu: float
    c: float
    r: float
    delta: float

    @property
    def rho_u(self) -> float:
        return self.lambda_u / self.mu

    @property
    def rho_v(self) -> float:
        return self.lambda_v / self.mu

    @property
    def alpha(self) -> float:
        return self.gamma_u / (self.c - self.rho_u)

    @property
    def t_u(self) -> float:
        return self.alpha * self.r


@dataclass(frozen=True)
class DerivedConstants:
    rho_u: float
    rho_v: float
    alpha: float
    t_u: float
    t_u_star: float
    t_u_star2: float
    k_delta_u: float
    k_delta_v: float
    k1: float
    k2: float
    k3: float
    k4: float
    eps: float
    eps1: float
    eps2: float


def k_delta(lam: float, mu: float, delta: float) -> float:
    """Large-deviation decay rate for the compound-Poisson input tube."""
    return (lam + delta * mu) + lam - 2.0 * math.sqrt(lam * (lam + delta * mu))


def _deviation_ks(spec: NetworkSpec, eps1: float, eps2: float):
    # displayed prefactor gamma_U - 2*delta*alpha/(c - rho_U)
    a = spec.gamma_u - 2.0 * spec.delta * spec.alpha / (spec.c - spec.rho_u)
    if a <= 0:
        raise NonpositiveConstant(
            "gamma_U - 2*delta*alpha/(c - rho_U) must be positive; reduce delta"
        )
    k1 = a * (eps1 - math.log1p(eps1)) / (1.0 + eps1)
    k2 = a * (1.0 + eps1) * (-1.0 - math.log(eps2 / (a * (1.0 + eps1))))
    k3 = eps2
    k4 = a * (1.0 + eps1)
    if k2 <= 0:
        raise NonpositiveConstant("K2 is non-positive; reduce eps2")
    return k1, k2, k3, k4


def validate(
    spec: NetworkSpec,
    eps1: float | None = None,
    eps2: float | None = None,
) -> DerivedConstants:
    """Check every spec invariant and return the derived constants.

    eps1 and eps2 are free analysis parameters entering K1..K4; the
    defaults are eps1 = 0.1 and eps2 = eps/(3c) with eps = 0.3*c*delta.
    """
    if spec.size_u < 1 or spec.size_v < 1:
        raise InvalidSpec("side sizes must be positive integers")
    for name in ("gamma_u", "gamma_v", "lambda_u", "lambda_v", "mu", "c", "r"):
        if getattr(spec, name) <= 0:
            raise InvalidSpec(f"{name} must be positive")
    if spec.delta < 0:
        raise InvalidSpec("delta must be non-negative")
    if spec.gamma_v > spec.gamma_u:
        raise InvalidSpec("gamma_U >= gamma_V required")
    if spec.c <= spec.rho_u:
        raise InvalidSpec(f"stability violated: c={spec.c} <= rho_U={spec.rho_u}")
    if spec.c <= spec.rho_v:
        raise InvalidSpec(f"stability violated: c={spec.c} <= rho_V={spec.rho_v}")
    alpha = spec.alpha
    if spec.gamma_u - spec.delta * alpha <= 0:
        raise InvalidSpec("delta too large: gamma_U - delta*alpha must stay positive")

    eps = 0.3 * spec.c * spec.delta
    if eps1 is None:
        eps1 = 0.1
    if eps2 is None:
        eps2 = eps / (3.0 * spec.c) if eps > 0 else 0.0
    t_u = alpha * spec.r
    t_u_star = (spec.gamma_u - spec.delta * alpha) / (spec.c - spec.rho_u) * spec.r
    t_u_star2 = t_u - 2.0 * (t_u - t_u_star)
    if spec.delta > 0:
        k1, k2, k3, k4 = _deviation_ks(spec, eps1, eps2)
    else:
        k1 = k2 = k3 = k4 = 0.0
    return DerivedConstants(
        rho_u=spec.rho_u,
        rho_v=spec.rho_v,
        alpha=alpha,
        t_u=t_u,
        t_u_star=t_u_star,
        t_u_star2=t_u_star2,
        k_delta_u=k_delta(spec.lambda_u, spec.mu, spec.delta),
        k_delta_v=k_delta(spec.lambda_v, spec.mu, spec.delta),
        k1=k1,
        k2=k2,
        k3=k3,
        k4=k4,
        eps=eps,
        eps1=eps1,
        eps2=eps2,
    )


# ---------------------------------------------------------------------------
# activation rates


def external_argument(
    model: ModelKind, side: str, t: float, spec: NetworkSpec
) -> float:
    """Argument fed to the rate function in the externally driven models."""
    dr = spec.delta * spec.r
    if side == "U":
        base = spec.gamma_u * spec.r - (spec.c - spec.rho_u) * t
        if model is Model.EXTERNAL:
            return base
        if model is Model.LOWER:
            return base - dr
        if model is Model.UPPER:
            return base + 2.0 * dr
    else:
        base = spec.gamma_v * spec.r + spec.rho_v * t
        if model is Model.EXTERNAL:
            return base
        if model is Model.LOWER:
            return base + dr
        if model is Model.UPPER:
            return base - dr
    raise ValueError(f"no external argument for model {model!r}")


def activation_rate(
    model: ModelKind,
    side: str,
    t: float,
    q: float,
    spec: NetworkSpec,
    g_u: RateFunction,
    g_v: RateFunction,
) -> float:
    """Activation hazard of a single inactive node at time t.

    For the internal and isolated models the hazard is a function of the
    node's own queue length q; in all other models q is ignored.
    """
    if side not in ("U", "V"):
        raise ValueError("side must be 'U' or 'V'")
    g = g_u if side == "U" else g_v
    if model in (Model.INTERNAL, Model.ISOLATED):
        return g(q)
    if isinstance(model, Frozen):
        return g(external_argument(Model.EXTERNAL, side, model.s, spec))
    if model is Model.UPPER and t > spec.t_u:
        raise HorizonExceeded(f"upper external model undefined at t={t} > T_U={spec.t_u}")
    return g(external_argument(model, side, t, spec))
