"""Per-vehicle delay branches (local, RSU, HAPS) and handoff feasibility."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization, link_rate
from .scenario import Scenario, TaskSpec

X_MIN = 1e-9


@dataclass(frozen=True)
class Allocation:
    """Physical decision vector, one entry per ICV.

    ``rsu_on``/``haps_on`` mark routes that were available to the optimizer;
    a disabled route carries the floor split and no radio or compute share.
    """

    x_r: np.ndarray
    x_h: np.ndarray
    b_r: np.ndarray
    b_h: np.ndarray
    p_r: np.ndarray
    p_h: np.ndarray
    f_r: np.ndarray
    f_h: np.ndarray
    T: np.ndarray
    tau_r: np.ndarray
    tau_h: np.ndarray
    rsu_on: np.ndarray = field(default=None)
    haps_on: np.ndarray = field(default=None)

    def __post_init__(self):
        n = len(self.x_r)
        if self.rsu_on is None:
            object.__setattr__(self, "rsu_on", np.ones(n, dtype=bool))
        if self.haps_on is None:
            object.__setattr__(self, "haps_on", np.ones(n, dtype=bool))

    @property
    def num_icvs(self) -> int:
        return len(self.x_r)

    def max_violation(self, scenario: Scenario) -> float:
        """Largest violation of the physical resource constraints."""
        if self.num_icvs == 0:
            return 0.0
        viol = [
            np.max(self.x_r + self.x_h) - 1,
            np.sum(self.b_r + self.b_h) - 1,
            np.max(self.p_r + self.p_h) - 1,
            np.sum(self.f_h) - 1,
        ]
        for members in scenario.assoc_phi:
            if members:
                viol.append(np.sum(self.f_r[list(members)]) - 1)
        return float(max(0.0, *viol))


def local_delay(task: TaskSpec, x_r: float, x_h: float, F_L: float) -> float:
    if x_r + x_h > 1 + 1e-12:
        raise ValueError("split ratios exceed one")
    return max(0.0, 1 - x_r - x_h) * task.input_bits_eps * task.density_lambda / F_L


def _offload_branch(task, x, rate, prop, f, F):
    if rate <= 0 or f <= 0:
        raise ValueError("rate and compute share must be strictly positive")
    eps, lam = task.input_bits_eps, task.density_lambda
    return prop + x * eps / rate + x * eps * lam / (f * F)


def rsu_delay(task: TaskSpec, x_r, rate_r, prop_r, f_r, F_R) -> float:
    return _offload_branch(task, x_r, rate_r, prop_r, f_r, F_R)


def haps_delay(task: TaskSpec, x_h, rate_h, prop_h, f_h, F_H) -> float:
    return _offload_branch(task, x_h, rate_h, prop_h, f_h, F_H)


def branch_delays(alloc: Allocation, channels: ChannelRealization, scenario: Scenario):
    """Vectorised (T^L, T^R, T^H) for every ICV.

    Disabled routes report their propagation delay only.
    """
    F_L, F_R, F_H = scenario.compute_caps
    B, P, N0 = scenario.radio_caps
    eps, lam = scenario.eps, scenario.lam
    t_loc = np.maximum(0.0, 1 - alloc.x_r - alloc.x_h) * eps * lam / F_L

    def branch(on, x, b, p, gain, prop, f, F):
        out = prop.copy()
        if np.any(on):
            rate = link_rate(b[on], B, p[on], P, gain[on], N0)
            out[on] = prop[on] + x[on] * eps[on] / rate + x[on] * eps[on] * lam[on] / (f[on] * F)
        return out

    t_r = branch(alloc.rsu_on, alloc.x_r, alloc.b_r, alloc.p_r, channels.gain_rsu,
                 channels.prop_delay_rsu, alloc.f_r, F_R)
    t_h = branch(alloc.haps_on, alloc.x_h, alloc.b_h, alloc.p_h, channels.gain_haps,
                 channels.prop_delay_haps, alloc.f_h, F_H)
    return t_loc, t_r, t_h


def icv_delays(alloc: Allocation, channels: ChannelRealization, scenario: Scenario,
               dropped: np.ndarray | None = None) -> np.ndarray:
    """Per-ICV delay, the max over the branches in use.

    A route that is disabled, or whose portion is ``dropped``, is left out of the max.
    """
    t_loc, t_r, t_h = branch_delays(alloc, channels, scenario)
    use_r = alloc.rsu_on.copy()
    if dropped is not None:
        use_r &= ~np.asarray(dropped, dtype=bool)
    t_r = np.where(use_r, t_r, 0.0)
    t_h = np.where(alloc.haps_on, t_h, 0.0)
    return np.maximum(t_loc, np.maximum(t_r, t_h))


def icv_delay(alloc: Allocation, channels: ChannelRealization, scenario: Scenario, n: int) -> float:
    return float(icv_delays(alloc, channels, scenario)[n])


def handoff_feasible(alloc: Allocation, channels: ChannelRealization, scenario: Scenario,
                     n: int) -> tuple[bool, float]:
    """Whether ICV ``n``'s RSU portion completes before handoff, and the slack."""
    _, t_r, _ = branch_delays(alloc, channels, scenario)
    slack = float(scenario.handoff_times()[n] - t_r[n])
    return slack >= 0, slack
