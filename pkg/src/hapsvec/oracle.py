"""Exhaustive grid search for single-vehicle instances.

The grid covers the bandwidth split, the power split and both offloading
ratios at a common resolution, with the compute shares fixed at one.  For
fixed (b, p, x_r) the local branch falls and the HAPS branch rises
linearly in x_h, so the best grid x_h sits next to their crossing.  That
makes the four-axis search exact at the cost of a three-axis sweep.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .scenario import Scenario


@dataclass(frozen=True)
class OracleResult:
    objective: float
    x_r: float
    x_h: float
    b_r: float
    p_r: float
    evaluated: int


def _rate(b, p, B, P, gain, N0):
    bw = b * B
    with np.errstate(divide="ignore", invalid="ignore"):
        r = bw * np.log2(1 + p * P * gain / (bw * N0))
    return np.where(b > 0, np.nan_to_num(r, nan=0.0), 0.0)


def grid_oracle(scenario: Scenario, channels: ChannelRealization, resolution: int = 200,
                enforce_handoff: bool = True, use_rsu: bool = True,
                use_haps: bool = True) -> OracleResult:
    """Best delay of ICV 0 over the grid ``k / resolution`` on every axis."""
    if scenario.num_icvs != 1:
        raise ValueError("grid oracle handles single-vehicle scenarios only")
    F_L, F_R, F_H = scenario.compute_caps
    B, P, N0 = scenario.radio_caps
    eps, lam = float(scenario.eps[0]), float(scenario.lam[0])
    W = eps * lam / F_L
    deadline = float(scenario.handoff_times()[0])
    prop_r = float(channels.prop_delay_rsu[0])
    prop_h = float(channels.prop_delay_haps[0])
    grid = np.arange(resolution + 1) / resolution

    # split grids (b, p) on axis 0/1, x_r on axis 2
    b = grid[:, None, None]
    p = grid[None, :, None]
    x_r = grid[None, None, :] if use_rsu else np.zeros((1, 1, 1))
    rate_r = _rate(b, p, B, P, channels.gain_rsu[0], N0)
    rate_h = _rate(1 - b, 1 - p, B, P, channels.gain_haps[0], N0)
    with np.errstate(divide="ignore", invalid="ignore"):
        k_r = np.where(rate_r > 0, eps / rate_r, np.inf) + eps * lam / F_R
        k_h = np.where(rate_h > 0, eps / rate_h, np.inf) + eps * lam / F_H
        t_r = np.where(x_r > 0, prop_r + x_r * k_r, prop_r)
    ok = np.isfinite(t_r)
    if enforce_handoff:
        ok &= t_r <= deadline

    rest = 1 - x_r  # room left for x_h
    if use_haps:
        # crossing of W(rest - x_h) and prop_h + x_h k_h
        with np.errstate(invalid="ignore", divide="ignore"):
            x_star = np.where(np.isfinite(k_h), (W * rest - prop_h) / (W + k_h), 0.0)
        hi = np.floor(np.clip(x_star, 0, None) * resolution + 1e-9)
        cap = np.floor(rest * resolution + 1e-9)
        best = np.full(np.broadcast_shapes(t_r.shape, k_h.shape), np.inf)
        best_xh = np.zeros_like(best)
        for cand in (hi, hi + 1):
            kk = np.minimum(cand, cap)
            xh = kk / resolution
            with np.errstate(invalid="ignore"):
                t_h = np.where(xh > 0, prop_h + xh * k_h, prop_h)
            t_l = W * np.clip(rest - xh, 0, None)
            val = np.maximum(t_l, t_h)
            better = val < best
            best = np.where(better, val, best)
            best_xh = np.where(better, xh, best_xh)
    else:
        best = np.broadcast_to(W * rest, t_r.shape).copy()
        best_xh = np.zeros_like(best)
    total = np.where(ok, np.maximum(best, t_r if use_rsu else 0.0), np.inf)
    if not use_rsu:
        total = np.broadcast_to(total, (len(grid), len(grid), 1))
    flat = int(np.argmin(total))
    i, j, k = np.unravel_index(flat, total.shape)
    return OracleResult(
        objective=float(total[i, j, k]),
        x_r=float(grid[k]) if use_rsu else 0.0,
        x_h=float(np.broadcast_to(best_xh, total.shape)[i, j, k]),
        b_r=float(grid[i]),
        p_r=float(grid[j]),
        evaluated=int(total.size) * (resolution + 1),
    )
