"""Road, RSU, HAPS and vehicle world state.

A :class:`Scenario` is an immutable snapshot of one decision slot: vehicle
positions, the task each vehicle generated at the start of the slot, the
RSU association sets and the network capacities.  :func:`advance_slot`
produces the next snapshot.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

SPEED_OF_LIGHT = 3.0e8


class ConfigError(ValueError):
    """Raised for an invalid scenario or experiment configuration."""


@dataclass(frozen=True)
class RoadConfig:
    rsu_coverage_D: float
    rsu_positions: tuple[float, ...]
    road_length: float
    haps_altitude: float
    haps_horizontal: float

    @property
    def num_rsus(self) -> int:
        return len(self.rsu_positions)

    def validate(self) -> None:
        if not self.rsu_positions:
            raise ConfigError("at least one RSU is required")
        if self.rsu_coverage_D <= 0:
            raise ConfigError("RSU coverage must be positive")
        if self.haps_altitude <= 0:
            raise ConfigError("HAPS altitude must be positive")
        pos = np.asarray(self.rsu_positions, dtype=float)
        if np.any(np.diff(pos) <= 0):
            raise ConfigError("RSU positions must be strictly increasing")
        D = self.rsu_coverage_D
        for m, x in enumerate(pos):
            if not (m * D <= x < (m + 1) * D):
                raise ConfigError(
                    f"RSU {m} at {x} m lies outside its segment [{m * D}, {(m + 1) * D})"
                )
        if not np.isclose(self.road_length, self.num_rsus * D):
            raise ConfigError("road length must equal number of RSUs times coverage")

    def segment_of(self, position: np.ndarray) -> np.ndarray:
        seg = np.floor(np.asarray(position, dtype=float) / self.rsu_coverage_D).astype(int)
        return np.clip(seg, 0, self.num_rsus - 1)


@dataclass(frozen=True)
class IcvState:
    id: int
    position_l: float
    speed_v: float


@dataclass(frozen=True)
class TaskSpec:
    input_bits_eps: float
    density_lambda: float

    @property
    def workload(self) -> float:
        return self.input_bits_eps * self.density_lambda


@dataclass(frozen=True)
class ScenarioConfig:
    """Scenario parameters in SI units (bits, Hz, watts, cycles/s, meters)."""

    rsu_positions: tuple[float, ...] = (80.0, 240.0)
    rsu_coverage_D: float = 160.0
    road_length: float | None = None
    haps_altitude: float = 20_000.0
    haps_horizontal: float | None = None
    num_icvs: int = 10
    speed: float = 30.0
    F_local: float = 2e9
    F_rsu: float = 32e9
    F_haps: float = 100e9
    B_max: float = 20e6
    P_max: float = 10 ** (23 / 10) * 1e-3
    N0: float = 10 ** (-174 / 10) * 1e-3
    input_bits_set: tuple[float, ...] = (100e3, 300e3, 500e3, 700e3, 900e3)
    density_set: tuple[float, ...] = (500.0, 1000.0, 1500.0, 2000.0, 2500.0)
    alpha: float = 3.7
    beta0: float | None = None
    rician_K_dB: float = 10.0
    haps_antenna_gain: float = 10 ** (17 / 10)
    rsu_antenna_gain: float = 1.0
    carrier_hz: float = 2e9
    slot_s: float = 1.0
    d_min: float = 1.0

    def road(self) -> RoadConfig:
        length = self.road_length
        if length is None:
            length = len(self.rsu_positions) * self.rsu_coverage_D
        horizontal = self.haps_horizontal if self.haps_horizontal is not None else length / 2
        return RoadConfig(
            rsu_coverage_D=float(self.rsu_coverage_D),
            rsu_positions=tuple(float(x) for x in self.rsu_positions),
            road_length=float(length),
            haps_altitude=float(self.haps_altitude),
            haps_horizontal=float(horizontal),
        )

    def validate(self) -> None:
        self.road().validate()
        if self.num_icvs < 0:
            raise ConfigError("num_icvs must be non-negative")
        if self.speed <= 0:
            raise ConfigError("speed must be positive")
        for name in ("F_local", "F_rsu", "F_haps", "B_max", "P_max", "N0", "carrier_hz", "slot_s"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be strictly positive")
        if not self.input_bits_set or min(self.input_bits_set) <= 0:
            raise ConfigError("input bit set must be non-empty and positive")
        if not self.density_set or min(self.density_set) <= 0:
            raise ConfigError("density set must be non-empty and positive")


@dataclass(frozen=True)
class Scenario:
    road: RoadConfig
    icvs: tuple[IcvState, ...]
    tasks: tuple[TaskSpec, ...]
    assoc_phi: tuple[tuple[int, ...], ...]
    compute_caps: tuple[float, float, float]
    radio_caps: tuple[float, float, float]
    config: ScenarioConfig = field(repr=False, compare=False, default_factory=ScenarioConfig)

    @property
    def num_icvs(self) -> int:
        return len(self.icvs)

    @property
    def positions(self) -> np.ndarray:
        return np.array([c.position_l for c in self.icvs], dtype=float)

    @property
    def speeds(self) -> np.ndarray:
        return np.array([c.speed_v for c in self.icvs], dtype=float)

    @property
    def eps(self) -> np.ndarray:
        return np.array([t.input_bits_eps for t in self.tasks], dtype=float)

    @property
    def lam(self) -> np.ndarray:
        return np.array([t.density_lambda for t in self.tasks], dtype=float)

    def rsu_of(self) -> np.ndarray:
        """RSU index (0-based) serving each ICV."""
        out = np.empty(self.num_icvs, dtype=int)
        for m, members in enumerate(self.assoc_phi):
            out[list(members)] = m
        return out

    def handoff_times(self) -> np.ndarray:
        return np.array(
            [handoff_time(c, self.road.rsu_coverage_D) for c in self.icvs], dtype=float
        )


def handoff_time(icv: IcvState, D: float) -> float:
    """Time until the vehicle leaves its current RSU segment."""
    if D <= 0 or icv.speed_v <= 0:
        raise ValueError("coverage and speed must be positive")
    return (D - (icv.position_l % D)) / icv.speed_v


def _association(road: RoadConfig, positions: Sequence[float]) -> tuple[tuple[int, ...], ...]:
    seg = road.segment_of(np.asarray(positions, dtype=float)) if len(positions) else np.array([], int)
    return tuple(tuple(int(n) for n in np.flatnonzero(seg == m)) for m in range(road.num_rsus))


def _draw_tasks(config: ScenarioConfig, n: int, rng: np.random.Generator) -> tuple[TaskSpec, ...]:
    eps = rng.choice(np.asarray(config.input_bits_set, dtype=float), size=n)
    lam = rng.choice(np.asarray(config.density_set, dtype=float), size=n)
    return tuple(TaskSpec(float(e), float(l)) for e, l in zip(eps, lam))


def _build(config: ScenarioConfig, road: RoadConfig, icvs, tasks) -> Scenario:
    return Scenario(
        road=road,
        icvs=tuple(icvs),
        tasks=tuple(tasks),
        assoc_phi=_association(road, [c.position_l for c in icvs]),
        compute_caps=(config.F_local, config.F_rsu, config.F_haps),
        radio_caps=(config.B_max, config.P_max, config.N0),
        config=config,
    )


def generate_scenario(config: ScenarioConfig, seed: int) -> Scenario:
    """Place the fleet uniformly on the road and draw one task per vehicle."""
    config.validate()
    road = config.road()
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0]))
    pos = rng.uniform(0.0, road.road_length, size=config.num_icvs)
    icvs = [IcvState(i, float(p), float(config.speed)) for i, p in enumerate(pos)]
    return _build(config, road, icvs, _draw_tasks(config, config.num_icvs, rng))


def advance_slot(scenario: Scenario, dt: float, seed: int) -> Scenario:
    """Move every vehicle by ``v*dt`` (wrapping at the road end) and draw fresh tasks."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    road = scenario.road
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 1]))
    icvs = [
        replace(c, position_l=float((c.position_l + c.speed_v * dt) % road.road_length))
        for c in scenario.icvs
    ]
    return _build(scenario.config, road, icvs, _draw_tasks(scenario.config, len(icvs), rng))


def scenario_at_slot(config: ScenarioConfig, seed: int, slot: int) -> Scenario:
    """Scenario for ``slot`` (0-based) of the run started from ``seed``."""
    sc = generate_scenario(config, seed)
    for k in range(1, slot + 1):
        sc = advance_slot(sc, config.slot_s, _slot_seed(seed, k))
    return sc


def iter_slots(config: ScenarioConfig, seed: int, num_slots: int):
    sc = generate_scenario(config, seed)
    for k in range(num_slots):
        if k:
            sc = advance_slot(sc, config.slot_s, _slot_seed(seed, k))
        yield k, sc


def _slot_seed(seed: int, slot: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(slot), 7]).generate_state(1)[0])
