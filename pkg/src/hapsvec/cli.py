"""Command line: ``run``, ``trace``, ``oracle`` and ``validate``.

Exit codes: 0 success, 1 failed validation, 2 configuration error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import sys
import warnings
from dataclasses import replace

import numpy as np

from .channel import realize_channels
from .config import apply_overrides, load_config, validate_document
from .harness import (channel_seed, emit_convergence_trace, plan_from_document, run_experiment,
                      solve_slot)
from .metrics import scheme
from .oracle import grid_oracle
from .sca import ScaOptions, sca_solve
from .scenario import ConfigError, generate_scenario

EXIT_OK, EXIT_INVALID, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


def _document(args):
    doc = load_config(args.config) if args.config else validate_document({})
    return apply_overrides(doc, args.set)


def _cmd_run(args) -> int:
    doc = _document(args)
    plan = plan_from_document(doc, args.config)
    table = run_experiment(plan, workers=args.workers)
    table.write_csv(args.output)
    if args.json:
        table.write_json(args.json)
    print(f"wrote {len(table.rows)} rows to {args.output}; "
          f"{table.warning_count} warning(s), {table.failure_count} failure(s)")
    return EXIT_OK


def _sca_options(doc) -> ScaOptions:
    try:
        return ScaOptions(i_max=int(doc["solver"]["i_max"]), zeta=float(doc["solver"]["zeta"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad solver option: {exc}") from exc


def _cmd_trace(args) -> int:
    doc = _document(args)
    plan = plan_from_document(doc, args.config)
    paths = emit_convergence_trace(plan.config, args.mode, args.seed, args.output,
                                   _sca_options(doc))
    for p in paths:
        print(p)
    return EXIT_OK


def _cmd_oracle(args) -> int:
    doc = _document(args)
    cfg = replace(plan_from_document(doc, args.config).config, num_icvs=1)
    sca = _sca_options(doc)
    worst = -np.inf
    print("seed,oracle,sca,relative_gap")
    for seed in range(args.seed, args.seed + args.count):
        sc = generate_scenario(cfg, seed)
        ch = realize_channels(sc, channel_seed(seed, 0))
        o = grid_oracle(sc, ch, resolution=args.resolution)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            tr = sca_solve(sc, ch, "sum", sca)
        gap = (tr.objective - o.objective) / o.objective
        worst = max(worst, gap)
        print(f"{seed},{o.objective!r},{tr.objective!r},{gap:.3e}")
    return EXIT_OK if worst <= 0.01 else EXIT_INVALID


def _cmd_validate(args) -> int:
    doc = _document(args)
    cfg = plan_from_document(doc, args.config).config
    sca = _sca_options(doc)
    ok = True
    for seed in range(args.seed, args.seed + args.count):
        sc = generate_scenario(cfg, seed)
        ch = realize_channels(sc, channel_seed(seed, 0))
        runs = {m: solve_slot(sc, ch, scheme("HRVIN", True, m), sca) for m in ("sum", "max")}
        checks = {}
        for m, r in runs.items():
            obj = np.asarray(r.trace.objectives)
            checks[f"{m}: monotone"] = bool(np.all(np.diff(obj) <= 1e-9))
            checks[f"{m}: solved"] = r.allocation is not None
            if r.allocation is not None:
                checks[f"{m}: resources"] = r.allocation.max_violation(sc) <= 1e-9
                checks[f"{m}: handoff"] = bool(np.all(
                    r.rsu_delays[r.allocation.rsu_on] <= sc.handoff_times()[r.allocation.rsu_on]
                    + 1e-9))
        if all(r.allocation is not None for r in runs.values()):
            s, x = runs["sum"].delays, runs["max"].delays
            checks["max-mode max delay <= sum-mode"] = x.max() <= s.max() + 1e-9
            checks["sum-mode total <= max-mode"] = s.sum() <= x.sum() + 1e-9
        for name, passed in checks.items():
            print(f"seed {seed} {name}: {'PASS' if passed else 'FAIL'}")
            ok &= passed
    return EXIT_OK if ok else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hapsvec", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp):
        sp.add_argument("config", nargs="?", help="JSON config file (defaults if omitted)")
        sp.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override a config key; repeatable")

    r = sub.add_parser("run", help="run an experiment plan and write a CSV")
    common(r)
    r.add_argument("-o", "--output", default="results.csv")
    r.add_argument("--json", help="also write a JSON mirror")
    r.add_argument("--workers", type=int, default=1)
    r.set_defaults(func=_cmd_run)

    t = sub.add_parser("trace", help="write SCA convergence traces")
    common(t)
    t.add_argument("--mode", choices=("sum", "max", "both"), default="both")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("-o", "--output", default="traces", help="output directory")
    t.set_defaults(func=_cmd_trace)

    o = sub.add_parser("oracle", help="compare SCA with the grid oracle on 1-ICV instances")
    common(o)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--count", type=int, default=5)
    o.add_argument("--resolution", type=int, default=200)
    o.set_defaults(func=_cmd_oracle)

    v = sub.add_parser("validate", help="check solver invariants on a few seeds")
    common(v)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--count", type=int, default=3)
    v.set_defaults(func=_cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
