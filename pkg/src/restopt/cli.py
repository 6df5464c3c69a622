"""Command-line front end: run experiments and validate configs."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .experiment import run_experiment
from .io import ConfigError, build_manifest, load_config, write_results
from .rollout import POLICY_NAMES


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="restopt",
        description="Crew-constrained repair scheduling for interdependent "
                    "community networks after an earthquake.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a base-vs-rollout comparison experiment")
    run.add_argument("--config", required=True, help="experiment config (YAML)")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seed", type=int, default=None, help="master seed override")
    run.add_argument("--policy", default=None,
                     help=f"comma-separated policies, from {', '.join(POLICY_NAMES)}")
    run.add_argument("--replicates", type=int, default=None)
    run.add_argument("--crews", type=int, default=None, help="crew budget N")
    run.add_argument("--sa-iters", type=int, default=None)
    run.add_argument("--sa-t0", type=float, default=None)
    run.add_argument("--sa-gamma", type=float, default=None)
    run.add_argument("--sa-pool", type=int, default=None)
    run.add_argument("--oracle-cap", type=int, default=None)
    run.add_argument("--workers", type=int, default=None)

    val = sub.add_parser("validate", help="check a config without running")
    val.add_argument("--config", required=True, help="experiment config (YAML)")
    return parser


def _apply_overrides(bundle, args):
    exp = bundle.experiment
    sa = exp.sa_schedule
    if args.sa_iters is not None:
        sa = replace(sa, iterations=args.sa_iters)
    if args.sa_t0 is not None:
        sa = replace(sa, t0=args.sa_t0)
    if args.sa_gamma is not None:
        sa = replace(sa, cooling=args.sa_gamma)
    if args.sa_pool is not None:
        sa = replace(sa, pool_size=args.sa_pool)
    updates = {"sa_schedule": sa, "progress": True}
    if args.seed is not None:
        updates["master_seed"] = args.seed
    if args.policy is not None:
        updates["policies"] = tuple(p.strip() for p in args.policy.split(",") if p.strip())
    if args.replicates is not None:
        updates["replicates"] = args.replicates
    if args.crews is not None:
        updates["crew_budget"] = args.crews
    if args.oracle_cap is not None:
        updates["oracle_cap"] = args.oracle_cap
    if args.workers is not None:
        updates["workers"] = args.workers
    exp = replace(exp, **updates)
    for p in exp.policies:
        if p not in POLICY_NAMES:
            raise ConfigError([f"unknown policy '{p}' (choose from {POLICY_NAMES})"])
    return replace(bundle, experiment=exp)


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        bundle = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        print(f"OK: {args.config} "
              f"({len(bundle.community.components)} components, "
              f"{len(bundle.community.retailers)} retailers, "
              f"population {bundle.community.total_population})")
        return 0

    try:
        bundle = _apply_overrides(bundle, args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        result = run_experiment(bundle.community, bundle.hazard, bundle.experiment)
        manifest = build_manifest(bundle, result)
        paths = write_results(
            result, manifest, Path(args.out),
            population_cap=float(bundle.community.total_population),
        )
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1

    for policy, stats in manifest.policy_summary.items():
        print(f"{policy:>12s}: mean F = {stats['mean_f']:.1f}  "
              f"std = {stats['std_f']:.1f}  "
              f"min = {stats['min_f']:.1f}  max = {stats['max_f']:.1f}")
    print("wrote " + ", ".join(str(p) for p in paths))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
