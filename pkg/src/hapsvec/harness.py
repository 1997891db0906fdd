"""Experiment plans, sweeps over scheme matrices, and result tables."""
from __future__ import annotations

import csv
import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .channel import ChannelRealization, realize_channels
from .convex_core import AssemblyOptions
from .delay_model import Allocation, branch_delays, icv_delays
from .metrics import HRVIN, MetricsRecord, SchemeConfig, apply_scheme, run_metrics, scheme
from .sca import ScaOptions, ScaTrace, sca_solve
from .scenario import ConfigError, Scenario, ScenarioConfig, iter_slots

# axis -> (ScenarioConfig field, conversion from the axis unit)
AXES = {
    "none": (None, None),
    "bandwidth": ("B_max", lambda v: v * 1e6),          # MHz
    "power": ("P_max", lambda v: 10 ** (v / 10) * 1e-3),  # dBm
    "F_H": ("F_haps", lambda v: v * 1e9),                # Gcycles/s
    "F_R": ("F_rsu", lambda v: v * 1e9),                 # Gcycles/s
    "speed": ("speed", float),                           # m/s
}

COLUMNS = ("axis_value", "scheme", "mode", "seed", "slot", "avg_delay", "max_delay", "jain",
           "failed_workload", "share_local", "share_rsu", "share_haps", "sca_iters", "status")


@dataclass(frozen=True)
class ExperimentPlan:
    config: ScenarioConfig = field(default_factory=ScenarioConfig)
    axis: str = "none"
    values: tuple = ()
    schemes: tuple = (HRVIN,)
    seeds: tuple = tuple(range(20))
    slots: int = 1
    sca: ScaOptions = ScaOptions()
    base_config_path: str | None = None

    def validate(self) -> None:
        if self.axis not in AXES:
            raise ConfigError(f"unknown sweep axis {self.axis!r}; choose from {sorted(AXES)}")
        vals = list(self.values)
        if self.axis == "none":
            if vals:
                raise ConfigError("axis 'none' takes no sweep values")
        elif not vals:
            raise ConfigError(f"axis {self.axis!r} needs at least one value")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ConfigError("sweep values must be strictly increasing")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if not self.schemes:
            raise ConfigError("at least one scheme is required")
        if self.slots < 1:
            raise ConfigError("slots must be at least 1")
        self.config.validate()
        for v in self.points():
            self.config_at(v).validate()

    def points(self) -> list:
        return [None] if self.axis == "none" else list(self.values)

    def config_at(self, value) -> ScenarioConfig:
        name, conv = AXES[self.axis]
        if name is None or value is None:
            return self.config
        return replace(self.config, **{name: conv(float(value))})


def plan_from_document(doc: dict, base_config_path: str | None = None) -> ExperimentPlan:
    from .config import scenario_config

    exp, sol = doc["experiment"], doc["solver"]
    seeds = exp["seeds"]
    if isinstance(seeds, dict):
        extra = set(seeds) - {"base", "count"}
        if extra:
            raise ConfigError(f"unknown key(s) in experiment.seeds: {sorted(extra)}")
        seeds = tuple(range(int(seeds.get("base", 0)),
                            int(seeds.get("base", 0)) + int(seeds.get("count", 20))))
    elif isinstance(seeds, list) and all(isinstance(s, int) for s in seeds):
        seeds = tuple(seeds)
    else:
        raise ConfigError("experiment.seeds must be a list of integers or {base, count}")
    try:
        schemes = tuple(scheme(name, bool(exp["enforce_handoff"]), mode)
                        for mode in exp["modes"] for name in exp["schemes"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    try:
        sca = ScaOptions(i_max=int(sol["i_max"]), zeta=float(sol["zeta"]))
        values = tuple(float(v) for v in exp["values"])
        slots = int(exp["slots"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad experiment or solver value: {exc}") from exc
    if sca.i_max < 1 or sca.zeta < 0:
        raise ConfigError("solver.i_max must be >= 1 and solver.zeta >= 0")
    plan = ExperimentPlan(config=scenario_config(doc), axis=str(exp["axis"]), values=values,
                          schemes=schemes, seeds=seeds, slots=slots, sca=sca,
                          base_config_path=base_config_path)
    plan.validate()
    return plan


def channel_seed(seed: int, slot: int) -> int:
    """Channel stream for (seed, slot); shared by every scheme and sweep point."""
    return int(np.random.SeedSequence([int(seed), int(slot), 11]).generate_state(1)[0])


@dataclass
class SlotResult:
    scheme: SchemeConfig
    scenario: Scenario
    channels: ChannelRealization
    trace: ScaTrace
    allocation: Allocation | None
    metrics: MetricsRecord | None
    delays: np.ndarray | None
    rsu_delays: np.ndarray | None

    @property
    def status(self) -> str:
        t = self.trace
        if t.failed or self.allocation is None:
            return "failed"
        if t.warning.startswith("converged-with-warning"):
            return "converged-with-warning"
        return "converged" if t.converged else "max-iter"


def solve_slot(scenario: Scenario, channels: ChannelRealization, scheme_cfg: SchemeConfig,
               sca: ScaOptions = ScaOptions()) -> SlotResult:
    opts = apply_scheme(AssemblyOptions(), scheme_cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        trace = sca_solve(scenario, channels, scheme_cfg.mode, sca, opts)
    alloc = trace.allocation
    if alloc is None:
        return SlotResult(scheme_cfg, scenario, channels, trace, None, None, None, None)
    _, t_r, _ = branch_delays(alloc, channels, scenario)
    return SlotResult(scheme_cfg, scenario, channels, trace, alloc,
                      run_metrics(alloc, scenario, channels),
                      icv_delays(alloc, channels, scenario), t_r)


def _row(value, res: SlotResult, seed: int, slot: int) -> dict:
    row = {"axis_value": "" if value is None else value, "scheme": res.scheme.name,
           "mode": res.scheme.mode, "seed": seed, "slot": slot,
           "sca_iters": res.trace.iterations, "status": res.status}
    m = res.metrics
    for k in ("avg_delay", "max_delay", "jain", "failed_workload",
              "share_local", "share_rsu", "share_haps"):
        row[k] = math.nan if m is None else getattr(m, k)
    return row


def _run_point(plan: ExperimentPlan, value, seed: int) -> list[dict]:
    cfg = plan.config_at(value)
    rows = []
    for slot, sc in iter_slots(cfg, seed, plan.slots):
        ch = realize_channels(sc, channel_seed(seed, slot))
        for sch in plan.schemes:
            rows.append(_row(value, solve_slot(sc, ch, sch, plan.sca), seed, slot))
    return rows


def _sort_key(row):
    v = row["axis_value"]
    return (0.0 if v == "" else float(v), row["scheme"], row["mode"], row["seed"], row["slot"])


@dataclass
class ResultTable:
    rows: list

    @property
    def warning_count(self) -> int:
        return sum(r["status"] != "converged" for r in self.rows)

    @property
    def failure_count(self) -> int:
        return sum(r["status"] == "failed" for r in self.rows)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(COLUMNS)
            for r in self.rows:
                w.writerow([_fmt(r[c]) for c in COLUMNS])

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump([{c: r[c] for c in COLUMNS} for r in self.rows], fh, indent=1)

    def mean(self, column: str, **where) -> float:
        vals = [r[column] for r in self.rows if all(r[k] == v for k, v in where.items())]
        return float(np.mean(vals)) if vals else math.nan


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else v


def run_experiment(plan: ExperimentPlan, workers: int = 1) -> ResultTable:
    """Solve every (sweep value, scheme, seed, slot) cell of ``plan``.

    Rows come back sorted, so the table does not depend on ``workers``.
    """
    plan.validate()
    jobs = [(v, s) for v in plan.points() for s in plan.seeds]
    rows: list[dict] = []
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_run_point, [plan] * len(jobs), *zip(*jobs)):
                rows.extend(part)
    else:
        for v, s in jobs:
            rows.extend(_run_point(plan, v, s))
    rows.sort(key=_sort_key)
    return ResultTable(rows)


def emit_convergence_trace(config: ScenarioConfig, mode: str, seed: int, path,
                           sca: ScaOptions = ScaOptions()) -> list[Path]:
    """Write per-iteration SCA traces into directory ``path``.

    ``mode`` is ``sum``, ``max`` or ``both``; one file per mode.
    """
    modes = ("sum", "max") if mode == "both" else (mode,)
    if any(m not in ("sum", "max") for m in modes):
        raise ConfigError(f"unknown mode {mode!r}")
    config.validate()
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise PermissionError(f"directory {out} is not writable")
    sc = next(iter_slots(config, seed, 1))[1]
    ch = realize_channels(sc, channel_seed(seed, 0))
    written = []
    for m in modes:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            trace = sca_solve(sc, ch, m, sca)
        p = out / f"trace_{m}_seed{seed}.csv"
        trace.write_csv(p)
        written.append(p)
    return written
