"""Small-scale fading, path-loss gains, link rates and propagation delays."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import SPEED_OF_LIGHT, Scenario


def free_space_beta0(fc: float) -> float:
    """Free-space path loss at the 1 m reference distance."""
    return (SPEED_OF_LIGHT / (4 * np.pi * fc)) ** 2


@dataclass(frozen=True)
class FadingDraw:
    h_rsu_sq: np.ndarray
    h_haps_sq: np.ndarray


def rayleigh_power(rng: np.random.Generator, size) -> np.ndarray:
    g = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2)
    return np.abs(g) ** 2


def rician_power(rng: np.random.Generator, size, K_dB: float) -> np.ndarray:
    if not np.isfinite(K_dB):
        if K_dB > 0:
            return np.ones(size)
        return rayleigh_power(rng, size)
    K = 10 ** (K_dB / 10)
    g = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2)
    h = np.sqrt(K / (K + 1)) + np.sqrt(1 / (K + 1)) * g
    return np.abs(h) ** 2


def sample_fading(kind: str, seed: int, size=None, K_dB: float = 10.0) -> np.ndarray:
    """Draw |h|^2 samples for ``kind`` in {"rayleigh", "rician"}."""
    rng = np.random.default_rng(seed)
    if kind == "rayleigh":
        return rayleigh_power(rng, size)
    if kind == "rician":
        return rician_power(rng, size, K_dB)
    raise ValueError(f"unknown fading kind {kind!r}")


def nlos_gain(d, alpha: float, beta0: float, h_sq):
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    return beta0 * np.asarray(h_sq) / d**alpha


def los_gain(d, fc: float, G_ant: float, h_sq):
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0) or fc <= 0:
        raise ValueError("distance and carrier frequency must be positive")
    return G_ant * (SPEED_OF_LIGHT / (4 * np.pi * d * fc)) ** 2 * np.asarray(h_sq)


def link_rate(b_frac, B_max, p_frac, P_max, gain, N0):
    """Shannon rate of a link holding ``b_frac`` of the band and ``p_frac`` of the power."""
    b_frac = np.asarray(b_frac, dtype=float)
    if np.any(b_frac <= 0):
        raise ValueError("bandwidth ratio must be strictly positive")
    bw = b_frac * B_max
    return bw * np.log2(1 + np.asarray(p_frac) * P_max * np.asarray(gain) / (bw * N0))


@dataclass(frozen=True)
class ChannelRealization:
    d_rsu: np.ndarray
    d_haps: np.ndarray
    gain_rsu: np.ndarray
    gain_haps: np.ndarray
    prop_delay_rsu: np.ndarray
    prop_delay_haps: np.ndarray
    fading: FadingDraw


def realize_channels(scenario: Scenario, seed: int) -> ChannelRealization:
    cfg = scenario.config
    road = scenario.road
    n = scenario.num_icvs
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 2]))
    h_r = rayleigh_power(rng, n)
    h_h = rician_power(rng, n, cfg.rician_K_dB)
    pos = scenario.positions
    rsu_x = np.asarray(road.rsu_positions, dtype=float)[scenario.rsu_of()] if n else np.zeros(0)
    d_r = np.maximum(np.abs(pos - rsu_x), cfg.d_min)
    d_h = np.sqrt(road.haps_altitude**2 + (pos - road.haps_horizontal) ** 2)
    beta0 = cfg.beta0 if cfg.beta0 is not None else free_space_beta0(cfg.carrier_hz)
    return ChannelRealization(
        d_rsu=d_r,
        d_haps=d_h,
        gain_rsu=cfg.rsu_antenna_gain * nlos_gain(d_r, cfg.alpha, beta0, h_r),
        gain_haps=los_gain(d_h, cfg.carrier_hz, cfg.haps_antenna_gain, h_h),
        prop_delay_rsu=d_r / SPEED_OF_LIGHT,
        prop_delay_haps=d_h / SPEED_OF_LIGHT,
        fading=FadingDraw(h_r, h_h),
    )
