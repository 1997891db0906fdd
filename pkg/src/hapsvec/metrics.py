"""Baseline schemes and the reported metrics."""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .channel import ChannelRealization
from .convex_core import AssemblyOptions
from .delay_model import Allocation, branch_delays, icv_delays
from .scenario import Scenario


@dataclass(frozen=True)
class SchemeConfig:
    name: str = "HRVIN"
    use_rsu: bool = True
    use_haps: bool = True
    enforce_handoff: bool = True
    mode: str = "sum"

    def __post_init__(self):
        if self.mode not in ("sum", "max"):
            raise ValueError(f"mode must be 'sum' or 'max', got {self.mode!r}")


HRVIN = SchemeConfig("HRVIN")
WO_RSU = SchemeConfig("woRSU", use_rsu=False)
WO_HAPS = SchemeConfig("woHAPS", use_haps=False)
SCHEMES = {s.name: s for s in (HRVIN, WO_RSU, WO_HAPS)}


def scheme(name: str, enforce_handoff: bool = True, mode: str = "sum") -> SchemeConfig:
    try:
        base = SCHEMES[name]
    except KeyError:
        raise ValueError(f"unknown scheme {name!r}; choose from {sorted(SCHEMES)}") from None
    return replace(base, enforce_handoff=enforce_handoff, mode=mode)


def apply_scheme(options: AssemblyOptions, scheme_cfg: SchemeConfig) -> AssemblyOptions:
    """Assembly options with the scheme's routes and handoff rows switched on or off."""
    return replace(options, use_rsu=scheme_cfg.use_rsu, use_haps=scheme_cfg.use_haps,
                   enforce_handoff=scheme_cfg.enforce_handoff, mode=scheme_cfg.mode)


def jain_fairness(delays) -> float:
    y = np.asarray(delays, dtype=float)
    if y.size == 0:
        raise ValueError("Jain index of an empty set is undefined")
    if np.any(y < 0):
        raise ValueError("delays must be non-negative")
    sq = float(np.sum(y * y))
    if sq == 0:
        raise ValueError("Jain index is undefined when every delay is zero")
    return float(np.sum(y) ** 2 / (y.size * sq))


def dropped_mask(alloc: Allocation, scenario: Scenario, channels: ChannelRealization) -> np.ndarray:
    """ICVs whose RSU portion would still be running at handoff."""
    _, t_r, _ = branch_delays(alloc, channels, scenario)
    return alloc.rsu_on & (t_r > scenario.handoff_times())


def failed_workload(alloc: Allocation, scenario: Scenario, channels: ChannelRealization) -> float:
    """Cycles dropped because the RSU portion misses the handoff deadline."""
    drop = dropped_mask(alloc, scenario, channels)
    return float(np.sum(alloc.x_r[drop] * scenario.eps[drop] * scenario.lam[drop]))


def split_shares(alloc: Allocation) -> tuple[float, float, float]:
    """Unweighted mean of (local, RSU, HAPS) ratios over ICVs."""
    local = np.clip(1 - alloc.x_r - alloc.x_h, 0, 1)
    return float(np.mean(local)), float(np.mean(alloc.x_r)), float(np.mean(alloc.x_h))


CSV_COLUMNS = ("avg_delay", "max_delay", "jain", "failed_workload",
               "share_local", "share_rsu", "share_haps")


@dataclass(frozen=True)
class MetricsRecord:
    avg_delay: float
    max_delay: float
    jain: float
    failed_workload: float
    share_local: float
    share_rsu: float
    share_haps: float
    runs: int = 1
    avg_delay_std: float = 0.0
    max_delay_std: float = 0.0
    failed_workload_std: float = 0.0

    @property
    def split_shares(self) -> tuple[float, float, float]:
        return self.share_local, self.share_rsu, self.share_haps

    def as_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def run_metrics(alloc: Allocation, scenario: Scenario, channels: ChannelRealization) -> MetricsRecord:
    """Metrics of one solved slot.  Delays are the planned per-ICV delays."""
    d = icv_delays(alloc, channels, scenario)
    loc, rsu, haps = split_shares(alloc)
    return MetricsRecord(
        avg_delay=float(np.mean(d)),
        max_delay=float(np.max(d)),
        jain=jain_fairness(d),
        failed_workload=failed_workload(alloc, scenario, channels),
        share_local=loc, share_rsu=rsu, share_haps=haps,
    )


def summarize(records) -> MetricsRecord:
    """Average per-run records (each already a mean over its ICVs)."""
    records = list(records)
    if not records:
        raise ValueError("nothing to summarize")
    col = {f.name: np.array([getattr(r, f.name) for r in records], dtype=float)
           for f in fields(MetricsRecord) if f.name in CSV_COLUMNS}
    std = lambda a: float(np.std(a, ddof=1)) if len(a) > 1 else 0.0  # noqa: E731
    return MetricsRecord(
        **{k: float(np.mean(v)) for k, v in col.items()},
        runs=len(records),
        avg_delay_std=std(col["avg_delay"]),
        max_delay_std=std(col["max_delay"]),
        failed_workload_std=std(col["failed_workload"]),
    )


def write_records_csv(records, path) -> None:
    names = [f.name for f in fields(MetricsRecord)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for r in records:
            w.writerow([repr(getattr(r, n)) if isinstance(getattr(r, n), float) else getattr(r, n)
                        for n in names])


def write_records_json(records, path) -> None:
    with open(path, "w") as fh:
        json.dump([r.as_dict() for r in records], fh, indent=1, sort_keys=True)
