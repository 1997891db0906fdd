import itertools

import numpy as np
import pytest

from hapsvec.channel import link_rate
from hapsvec.oracle import grid_oracle
from hapsvec.scenario import ScenarioConfig, generate_scenario

from conftest import instance


def _naive(sc, ch, res, enforce=True):
    """Literal four-axis loop, f fixed at 1."""
    F_L, F_R, F_H = sc.compute_caps
    B, P, N0 = sc.radio_caps
    eps, lam = sc.eps[0], sc.lam[0]
    deadline = sc.handoff_times()[0]
    grid = np.arange(res + 1) / res
    best = np.inf
    for b, p in itertools.product(grid, grid):
        rr = link_rate(b, B, p, P, ch.gain_rsu[0], N0) if b > 0 else 0.0
        rh = link_rate(1 - b, B, 1 - p, P, ch.gain_haps[0], N0) if b < 1 else 0.0
        for xr, xh in itertools.product(grid, grid):
            if xr + xh > 1 + 1e-12:
                continue
            if (xr > 0 and rr <= 0) or (xh > 0 and rh <= 0):
                continue
            tr = ch.prop_delay_rsu[0] + (xr * eps / rr + xr * eps * lam / F_R if xr else 0)
            th = ch.prop_delay_haps[0] + (xh * eps / rh + xh * eps * lam / F_H if xh else 0)
            if enforce and tr > deadline:
                continue
            tl = max(0.0, 1 - xr - xh) * eps * lam / F_L
            best = min(best, max(tl, tr, th))
    return best


@pytest.mark.parametrize("seed", [0, 3])
def test_fast_oracle_equals_literal_search(seed):
    sc, ch = instance(seed, 1)
    assert grid_oracle(sc, ch, resolution=10).objective == pytest.approx(_naive(sc, ch, 10), rel=1e-12)


def test_finer_grid_is_no_worse():
    sc, ch = instance(1, 1)
    assert grid_oracle(sc, ch, 200).objective <= grid_oracle(sc, ch, 20).objective + 1e-15


def test_removed_routes():
    sc, ch = instance(2, 1)
    both = grid_oracle(sc, ch, 50).objective
    assert grid_oracle(sc, ch, 50, use_rsu=False).objective >= both
    assert grid_oracle(sc, ch, 50, use_haps=False).objective >= both
    only_local = grid_oracle(sc, ch, 50, use_rsu=False, use_haps=False)
    assert only_local.objective == pytest.approx(sc.eps[0] * sc.lam[0] / sc.compute_caps[0])


def test_needs_single_icv():
    sc, ch = instance(0, 2)
    with pytest.raises(ValueError):
        grid_oracle(sc, ch)
