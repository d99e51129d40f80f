"""Command-line interface: theory, simulate, couple, sweep and validate.

Configuration is a single JSON file; unknown keys are rejected so typos
fail loudly.  All outputs are deterministic given the config and seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .coupling import sandwich_stats
from .errors import ParseError, QcsmaError
from .harness import estimate_mean, exponent_fit, run_replicas
from .params import (
    ConstantSV,
    Frozen,
    LogPower,
    Model,
    NetworkSpec,
    PowerLaw,
    PowerSlowlyVarying,
    SlowlyVaryingOnly,
    Tabulated,
    validate,
)
from .theory import closed_form_Mc, limit_law_P, solve_Mc_numeric

__all__ = ["main", "load_config", "build_rate", "build_model"]


_SPEC_KEYS = (
    "size_u",
    "size_v",
    "gamma_u",
    "gamma_v",
    "lambda_u",
    "lambda_v",
    "mu",
    "c",
    "r",
    "delta",
)
_TOP_KEYS = {
    "spec",
    "g_u",
    "g_v",
    "model",
    "freeze_time",
    "replicas",
    "seed",
    "horizon_mult",
    "sample_dt",
    "sweep_r",
    "eps1",
    "eps2",
}


def _reject_unknown(d: dict, allowed, where: str):
    for key in d:
        if key not in allowed:
            raise ParseError(f"unknown key {key!r} in {where}")


def build_modulation(d: dict):
    _reject_unknown(d, {"kind", "exponent", "value"}, "modulation")
    kind = d.get("kind")
    if kind == "log_power":
        return LogPower(exponent=float(d["exponent"]))
    if kind == "constant":
        return ConstantSV(value=float(d["value"]))
    raise ParseError(f"unknown modulation kind {kind!r}")


def build_rate(d: dict, where: str):
    """Rate function from its JSON description."""
    if not isinstance(d, dict):
        raise ParseError(f"{where} must be an object")
    _reject_unknown(d, {"kind", "G", "beta", "modulation", "breakpoints"}, where)
    kind = d.get("kind")
    if kind == "power":
        return PowerLaw(G=float(d.get("G", 1.0)), beta=float(d["beta"]))
    if kind == "power_slowly_varying":
        return PowerSlowlyVarying(
            beta=float(d["beta"]), modulation=build_modulation(d["modulation"])
        )
    if kind == "slowly_varying":
        return SlowlyVaryingOnly(modulation=build_modulation(d["modulation"]))
    if kind == "tabulated":
        return Tabulated(tuple((float(x), float(v)) for x, v in d["breakpoints"]))
    raise ParseError(f"unknown rate kind {kind!r} in {where}")


def build_model(name: str, freeze_time: float):
    if name == "frozen":
        return Frozen(s=float(freeze_time))
    try:
        return Model(name)
    except ValueError:
        raise ParseError(f"unknown model {name!r}") from None


def load_config(path: str, overrides: dict | None = None) -> dict:
    """Parse and validate a JSON config, applying CLI overrides."""
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ParseError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParseError("config must be a JSON object")
    _reject_unknown(raw, _TOP_KEYS, "config")
    if "spec" not in raw:
        raise ParseError("config is missing required key 'spec'")
    spec_d = dict(raw["spec"])
    _reject_unknown(spec_d, set(_SPEC_KEYS), "spec")
    for key in _SPEC_KEYS:
        if key not in spec_d:
            raise ParseError(f"spec is missing required key {key!r}")

    overrides = overrides or {}
    if overrides.get("r") is not None:
        spec_d["r"] = overrides["r"]
    spec = NetworkSpec(
        size_u=int(spec_d["size_u"]),
        size_v=int(spec_d["size_v"]),
        **{k: float(spec_d[k]) for k in _SPEC_KEYS[2:]},
    )
    validate(spec, eps1=raw.get("eps1"), eps2=raw.get("eps2"))

    try:
        g_u = build_rate(raw.get("g_u", {"kind": "power", "beta": 1.0}), "g_u")
        g_v = build_rate(raw.get("g_v", {"kind": "power", "beta": 1.0}), "g_v")
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed rate description: missing/bad {exc}") from exc
    cfg = {
        "spec": spec,
        "g_u": g_u,
        "g_v": g_v,
        "model": build_model(
            overrides.get("model") or raw.get("model", "internal"),
            raw.get("freeze_time", 0.0),
        ),
        "replicas": int(overrides.get("replicas") or raw.get("replicas", 100)),
        "seed": int(
            overrides["seed"] if overrides.get("seed") is not None
            else raw.get("seed", 0)
        ),
        "horizon_mult": float(raw.get("horizon_mult", 3.0)),
        "sample_dt": raw.get("sample_dt"),
        "sweep_r": raw.get("sweep_r"),
    }
    return cfg


def _json_dump(obj, path: Path):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def cmd_theory(cfg: dict, out: Path) -> int:
    spec, g_u = cfg["spec"], cfg["g_u"]
    report = closed_form_Mc(spec, g_u)
    mc_numeric = solve_Mc_numeric(spec, g_u)
    _json_dump(
        {
            "regime": report.regime,
            "Mc": report.Mc,
            "Mc_numeric": mc_numeric,
            "Fc": report.Fc,
            "exponent": report.exponent,
            "C": report.C,
            "T_U": spec.t_u,
            "alpha": spec.alpha,
        },
        out / "theory_report.json",
    )
    x_max = 3.0 / report.C if (report.C and report.C < 1.0) else 5.0
    with (out / "limit_law.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "survival"])
        for x in np.arange(0.0, x_max + 1e-9, 0.01):
            w.writerow([f"{x:.2f}", repr(limit_law_P(report, float(x)))])
    print(f"theory: regime={report.regime} Mc={report.Mc!r} -> {out}")
    return 0


def _write_trajectory_csv(traj, path: Path):
    sides = traj.sides()
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "node", "side", "active", "queue"])
        for i, t in enumerate(traj.times):
            for node in range(traj.n_nodes):
                w.writerow(
                    [
                        repr(float(t)),
                        node,
                        sides[node],
                        int(traj.active[i, node]),
                        repr(float(traj.queues[i, node])),
                    ]
                )


def cmd_simulate(cfg: dict, out: Path, trajectories: bool) -> int:
    from .engine import simulate_run

    spec = cfg["spec"]
    sample_dt = cfg["sample_dt"]
    if trajectories and sample_dt is None:
        sample_dt = spec.t_u / 512.0
    batch = run_replicas(
        spec,
        cfg["model"],
        cfg["g_u"],
        cfg["g_v"],
        n=cfg["replicas"],
        seedbase=cfg["seed"],
        horizon_mult=cfg["horizon_mult"],
    )
    with (out / "replicas.jsonl").open("w") as fh:
        for rep in batch.reports:
            fh.write(json.dumps(rep.to_json_dict(), sort_keys=True) + "\n")
    summary = {"n": batch.n, "censored_fraction": batch.censored_fraction}
    if batch.uncensored:
        mean, se, ci = estimate_mean(batch)
        summary.update({"mean_tau": mean, "se": se, "ci95": list(ci)})
    _json_dump(summary, out / "summary.json")
    if trajectories:
        for k in range(min(cfg["replicas"], 5)):
            traj = simulate_run(
                spec,
                cfg["model"],
                cfg["g_u"],
                cfg["g_v"],
                batch.reports[k].seed,
                horizon_mult=cfg["horizon_mult"],
                sample_dt=sample_dt,
            )
            _write_trajectory_csv(traj, out / f"trajectory_{k}.csv")
    print(
        f"simulate: n={batch.n} censored={batch.censored_fraction!r} -> {out}"
    )
    return 0


def cmd_couple(cfg: dict, out: Path) -> int:
    summary = sandwich_stats(
        cfg["spec"],
        cfg["g_u"],
        cfg["g_v"],
        n=cfg["replicas"],
        seedbase=cfg["seed"],
        keep_runs=True,
    )
    with (out / "coupled.jsonl").open("w") as fh:
        for run in summary.runs:
            fh.write(json.dumps(run.to_json_dict(), sort_keys=True) + "\n")
    _json_dump(
        {
            "n": summary.n,
            "n_usable": summary.n_usable,
            "p_sandwich": summary.p_sandwich,
            "wilson": list(summary.wilson),
            "ordered_fraction": summary.ordered_fraction,
            "good_fraction": summary.good_fraction,
            "gap": summary.gap,
        },
        out / "sandwich.json",
    )
    print(
        f"couple: p_sandwich={summary.p_sandwich!r} "
        f"usable={summary.n_usable}/{summary.n} -> {out}"
    )
    return 0


def cmd_sweep(cfg: dict, out: Path) -> int:
    from dataclasses import replace

    if not cfg["sweep_r"]:
        raise ParseError("sweep requires 'sweep_r' in the config")
    rows = []
    for r in cfg["sweep_r"]:
        spec_r = replace(cfg["spec"], r=float(r))
        batch = run_replicas(
            spec_r,
            cfg["model"],
            cfg["g_u"],
            cfg["g_v"],
            n=cfg["replicas"],
            seedbase=cfg["seed"],
            horizon_mult=cfg["horizon_mult"],
        )
        mean, se, _ = estimate_mean(batch)
        rows.append((float(r), batch.n, batch.censored_fraction, mean, se))
    with (out / "sweep.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "n", "censored", "mean_tau", "se"])
        for row in rows:
            w.writerow([repr(row[0]), row[1]] + [repr(v) for v in row[2:]])
    slope, intercept, r2 = exponent_fit([(row[0], row[3]) for row in rows])
    _json_dump(
        {"slope": slope, "intercept": intercept, "r_squared": r2},
        out / "fit.json",
    )
    print(f"sweep: slope={slope!r} r2={r2!r} -> {out}")
    return 0


def cmd_validate(out: Path, seed: int, only: list[str] | None) -> int:
    from .acceptance import run_acceptance

    results = run_acceptance(out, master_seed=seed, only=only)
    failed = 0
    for res in results:
        line = f"[{'PASS' if res['passed'] else 'FAIL'}] {res['name']}: {res['detail']}"
        print(line)
        failed += 0 if res["passed"] else 1
    _json_dump(
        [{k: v for k, v in r.items()} for r in results],
        out / "validate_report.json",
    )
    print(f"validate: {len(results) - failed}/{len(results)} criteria passed -> {out}")
    return 1 if failed else 0


def _build_parser():
    p = argparse.ArgumentParser(
        prog="qcsma",
        description="Queue-based random-access transition-time toolkit",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required=True):
        if config_required:
            sp.add_argument("--config", required=True, help="JSON config file")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--seed", type=int, default=None, help="master seed")

    sp = sub.add_parser("theory", help="closed-form scale, regime and limit law")
    common(sp)
    sp = sub.add_parser("simulate", help="replica batch of transition times")
    common(sp)
    sp.add_argument("--replicas", type=int, default=None)
    sp.add_argument("--model", default=None)
    sp.add_argument("--r", type=float, default=None)
    sp.add_argument(
        "--trajectories", action="store_true", help="emit sampled trajectory CSVs"
    )
    sp = sub.add_parser("couple", help="four-copy sandwich coupling statistics")
    common(sp)
    sp.add_argument("--replicas", type=int, default=None)
    sp = sub.add_parser("sweep", help="mean transition time against r, with fit")
    common(sp)
    sp.add_argument("--replicas", type=int, default=None)
    sp = sub.add_parser("validate", help="run the acceptance suite")
    common(sp, config_required=False)
    sp.add_argument(
        "--only",
        default=None,
        help="comma-separated subset of criteria to run",
    )
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "validate":
            only = args.only.split(",") if args.only else None
            return cmd_validate(out, args.seed if args.seed is not None else 0, only)
        overrides = {
            "seed": args.seed,
            "replicas": getattr(args, "replicas", None),
            "model": getattr(args, "model", None),
            "r": getattr(args, "r", None),
        }
        cfg = load_config(args.config, overrides)
        if args.command == "theory":
            return cmd_theory(cfg, out)
        if args.command == "simulate":
            return cmd_simulate(cfg, out, args.trajectories)
        if args.command == "couple":
            return cmd_couple(cfg, out)
        if args.command == "sweep":
            return cmd_sweep(cfg, out)
        raise ParseError(f"unknown command {args.command!r}")
    except QcsmaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
