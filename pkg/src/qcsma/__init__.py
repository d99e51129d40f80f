"""Transition-time simulator and analytics for queue-based random access
on complete bipartite interference networks."""

from .errors import (
    AllCensored,
    CouplingUndefined,
    DegenerateSpan,
    FrozenRateZero,
    HorizonExceeded,
    InsufficientSamples,
    InvalidSpec,
    MajorantViolated,
    NoBracket,
    NonpositiveConstant,
    ParseError,
    QcsmaError,
    SingularSystem,
    TabulatedOutOfRange,
    TooFewSamples,
    UnsupportedRateKind,
)
from .params import (
    ConstantSV,
    DerivedConstants,
    Frozen,
    LogPower,
    Model,
    NetworkSpec,
    PowerLaw,
    PowerSlowlyVarying,
    RateFunction,
    SlowlyVaryingOnly,
    Tabulated,
    activation_rate,
    k_delta,
    validate,
)
from .theory import (
    FrozenChain,
    Regime,
    TheoryReport,
    closed_form_Mc,
    deviation_constants,
    exact_mean_hitting_time,
    limit_law_P,
    mean_tau_frozen_asymptotic,
    nu,
    solve_Mc_numeric,
    survival_external_numeric,
)
from .engine import (
    TransitionReport,
    Trajectory,
    check_good_behavior,
    input_tube_exit_frequency,
    next_inhomogeneous_arrival,
    simulate_frozen_chain,
    simulate_run,
)
from .coupling import (
    CoupledRun,
    SandwichSummary,
    coupled_run_low,
    coupled_run_upp,
    run_coupled,
    sandwich_stats,
)
from .harness import (
    DistributionComparison,
    ReplicaBatch,
    estimate_mean,
    exponent_fit,
    gap_statistic,
    merge_batches,
    replica_seed,
    run_replicas,
    survival_compare,
)

__version__ = "1.0.0"
