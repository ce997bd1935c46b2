"""Command-line interface.

Subcommands:

* ``profiles``: list bundled technology profiles or show one.
* ``eval``: closed-form (and optionally Monte Carlo) metrics for a single
  architecture config.
* ``sweep``: run a named experiment preset (or a custom grid) and emit a
  CSV/JSON table.
* ``validate``: closed-form vs Monte Carlo comparison; exits 2 when any
  metric misses the tolerance.

Exit codes: 0 success, 1 usage or config error, 2 validation failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .arch import ArchitectureConfig, adc_min_bits, analytical_snr, dp_energy
from .config import ConfigError, load_config
from .sweep import ResultTable, SweepSpec, emit, run_experiment
from .tech import builtin_profile, builtin_profile_names

USAGE_ERROR, VALIDATION_ERROR = 1, 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="imclim",
        description="Energy-delay-accuracy models for analog in-memory dot products",
    )
    sub = p.add_subparsers(dest="command", required=True)

    prof = sub.add_parser("profiles", help="list or show technology profiles")
    prof.add_argument("name", nargs="?", help="profile to show in full")

    ev = sub.add_parser("eval", help="evaluate one architecture configuration")
    ev.add_argument("--config", required=True, help="JSON config file")
    ev.add_argument("--profile", help="bundled technology profile override")
    ev.add_argument("--adc-bits", type=int, help="converter bits (default: assigned)")
    ev.add_argument("--mc", action="store_true", help="also run the simulator")
    ev.add_argument("--trials", type=int, default=200, help="die instances for --mc")
    ev.add_argument("--vectors", type=int, default=100, help="vectors per die")
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--out", help="write results to file instead of stdout")
    ev.add_argument("--format", choices=("csv", "json"), default="csv")

    sw = sub.add_parser("sweep", help="run a named experiment preset")
    sw.add_argument("--experiment", help="preset name (or use --config)")
    sw.add_argument("--config", help="JSON config with a sweep section")
    sw.add_argument("--profile", help="bundled technology profile")
    sw.add_argument("--mc", action="store_true")
    sw.add_argument("--trials", type=int, help="die instances when --mc")
    sw.add_argument("--vectors", type=int, help="vectors per die when --mc")
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--out", required=True)
    sw.add_argument("--format", choices=("csv", "json"), default="csv")

    va = sub.add_parser("validate", help="closed forms vs Monte Carlo")
    va.add_argument("--config", required=True)
    va.add_argument("--profile", help="bundled technology profile override")
    va.add_argument("--tolerance", type=float, default=1.5, help="dB tolerance")
    va.add_argument("--trials", type=int, default=1000)
    va.add_argument("--vectors", type=int, default=100)
    va.add_argument("--seed", type=int, default=0)
    return p


def _load_arch(args) -> ArchitectureConfig:
    obj = load_config(args.config)
    if isinstance(obj, SweepSpec):
        if obj.base_arch is None:
            raise ConfigError("config resolves to a sweep without an architecture")
        obj = obj.base_arch
    if not isinstance(obj, ArchitectureConfig):
        raise ConfigError("config does not define an architecture")
    if getattr(args, "profile", None):
        obj = dataclasses.replace(obj, tech=builtin_profile(args.profile))
    return obj


def _cmd_profiles(args) -> int:
    if args.name:
        prof = builtin_profile(args.name)
        print(json.dumps(prof.to_dict(), indent=2))
    else:
        for name in builtin_profile_names():
            print(name)
    return 0


def _cmd_eval(args) -> int:
    from .mc import TrialPlan, run_trials

    cfg = _load_arch(args)
    pre = analytical_snr(cfg)
    bits = args.adc_bits if args.adc_bits else adc_min_bits(cfg, pre.snr_A_db)
    rep = analytical_snr(cfg, bits)
    energy = dp_energy(cfg, bits)
    cols = [
        ("metric", ""), ("value", ""), ("unit", ""),
    ]
    rows = [
        ["kind", cfg.kind.value, ""],
        ["n", cfg.n, ""],
        ["b_adc", bits, "bits"],
        ["sqnr_qiy_db", rep.sqnr_qiy_db, "dB"],
        ["snr_a_db", rep.snr_a_db, "dB"],
        ["snr_A_db", rep.snr_A_db, "dB"],
        ["snr_T_db", rep.snr_T_db, "dB"],
        ["dp_energy", energy, "J"],
    ]
    if args.mc:
        plan = TrialPlan(cfg, n_dies=args.trials, vectors_per_die=args.vectors,
                         seed=args.seed, b_adc=bits)
        est = run_trials(plan)
        rows += [
            ["mc_snr_a_db", est.snr_a_db, "dB"],
            ["mc_snr_A_db", est.snr_A_db, "dB"],
            ["mc_snr_T_db", est.snr_T_db, "dB"],
            ["mc_stderr_db", est.stderr_db, "dB"],
            ["mc_backend", est.backend, ""],
        ]
    table = ResultTable(cols, rows, {"seed": args.seed, "config": args.config})
    if args.out:
        emit(table, args.format, args.out)
    else:
        for row in rows:
            print(f"{row[0]:>14}  {row[1]}" + (f" {row[2]}" if row[2] else ""))
    return 0


def _cmd_sweep(args) -> int:
    if args.config:
        obj = load_config(args.config)
        if not isinstance(obj, SweepSpec):
            raise ConfigError("config does not define a sweep section")
        spec = obj
        if args.experiment:
            spec = dataclasses.replace(spec, experiment=args.experiment)
    elif args.experiment:
        spec = SweepSpec(experiment=args.experiment)
    else:
        raise ConfigError("sweep needs --experiment or --config")
    updates: dict = {"seed": args.seed}
    if args.profile:
        updates["profile"] = args.profile
    if args.mc:
        updates["mc_enabled"] = True
    if args.trials:
        updates["n_dies"] = args.trials
    if args.vectors:
        updates["vectors_per_die"] = args.vectors
    spec = dataclasses.replace(spec, **updates)
    table = run_experiment(spec)
    emit(table, args.format, args.out)
    print(f"wrote {len(table.rows)} rows to {args.out}")
    return 0


def _cmd_validate(args) -> int:
    from .mc import compare, run_validation

    cfg = _load_arch(args)
    report, estimate, bits = run_validation(
        cfg, n_dies=args.trials, vectors_per_die=args.vectors, seed=args.seed
    )
    result = compare(report, estimate, args.tolerance)
    print(f"b_adc={bits}  backend={estimate.backend}  samples={estimate.n_samples}")
    for key, delta in result.deltas_db.items():
        mark = "ok" if key not in result.failures else "FAIL"
        print(f"{key:>12}: formula-vs-mc delta {delta:+.3f} dB  [{mark}]")
    if not result.passed:
        print(f"validation failed at {args.tolerance} dB tolerance")
        return VALIDATION_ERROR
    print("validation passed")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    handlers = {
        "profiles": _cmd_profiles,
        "eval": _cmd_eval,
        "sweep": _cmd_sweep,
        "validate": _cmd_validate,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, KeyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
