"""How the mean transition time scales with the initial queue size r.

For g_U(x) = x**0.4 the mean grows like r**0.4; for g_U(x) = x**2 it
tracks the deterministic extinction time T_U = alpha*r.  A log-log fit
across a decade of r recovers the exponent from simulation alone.

Run from the repo root:  python3 scripts/03_scaling_sweep.py
"""

from dataclasses import replace

from qcsma import (
    Model,
    NetworkSpec,
    PowerLaw,
    closed_form_Mc,
    estimate_mean,
    exponent_fit,
    run_replicas,
)

base = NetworkSpec(
    size_u=2, size_v=2, gamma_u=1.0, gamma_v=1.0,
    lambda_u=1.0, lambda_v=1.0, mu=2.0, c=1.5, r=500.0, delta=0.05,
)
g_v = PowerLaw(1.0, 1.5)
rs = (500.0, 1000.0, 2000.0, 4000.0, 8000.0)

for beta in (0.4, 2.0):
    g_u = PowerLaw(1.0, beta)
    report = closed_form_Mc(base, g_u)
    print(f"g_U(x) = x**{beta}  ({report.regime}, predicted slope "
          f"{report.exponent:g})")
    sweep = []
    for r in rs:
        spec = replace(base, r=r)
        batch = run_replicas(spec, Model.INTERNAL, g_u, g_v, n=100, seedbase=9)
        mean, se, _ = estimate_mean(batch)
        sweep.append((r, mean))
        print(f"  r = {r:6g}   mean tau = {mean:10.2f} +- {se:6.2f}")
    slope, _, r2 = exponent_fit(sweep)
    print(f"  fitted slope {slope:.3f}  (R^2 = {r2:.4f})\n")
