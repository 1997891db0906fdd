import json
import math
from dataclasses import replace

import numpy as np
import pytest

from hapsvec.channel import realize_channels
from hapsvec.convex_core import (BLOCK, CORE_FAMILIES, XR, AssemblyOptions, ConvexSubproblem,
                                 InfeasibleStartError, LocalPoint, SolverOptions, _RowBuilder,
                                 assemble_subproblem, feasible_start, solve, start_splits)
from hapsvec.oracle import grid_oracle
from hapsvec.sca import init_local_point
from hapsvec.scenario import IcvState, ScenarioConfig, generate_scenario

from conftest import instance


def _sub(seed=0, n=10, mode="sum", **opts):
    sc, ch = instance(seed, n)
    o = AssemblyOptions(mode=mode, **opts)
    return assemble_subproblem(sc, ch, init_local_point(sc, ch, o), o), sc, ch


def _one_rsu_scenario(position=40.0):
    cfg = ScenarioConfig(num_icvs=1, rsu_positions=(80.0,))
    sc = generate_scenario(cfg, 0)
    icv = replace(sc.icvs[0], position_l=position)
    sc = replace(sc, icvs=(icv,), assoc_phi=((0,),))
    return sc, realize_channels(sc, 0)


def test_row_count_single_icv_single_rsu():
    sc, ch = _one_rsu_scenario()
    sub = assemble_subproblem(sc, ch, init_local_point(sc, ch))
    counts = sub.family_counts()
    assert sub.dim == BLOCK
    # 2 + M + 4N core rows, then the linearised local row and the handoff row
    assert sub.core_count == 2 + 1 + 4
    assert counts["local"] == 1 and counts["handoff"] == 1


@pytest.mark.parametrize("n", [3, 10])
def test_row_count_fleet(n):
    sub, sc, _ = _sub(n=n)
    occupied = sum(1 for phi in sc.assoc_phi if phi)
    assert sub.core_count == 2 + occupied + 4 * n
    assert sub.family_counts()["local"] == n
    assert sub.dim == BLOCK * n


def test_max_mode_adds_epigraph():
    sub, _, _ = _sub(n=4, mode="max")
    assert sub.dim == BLOCK * 4 + 1
    assert sub.family_counts()["epigraph"] == 4
    assert sub.c[-1] == 1 and sub.c[:-1].sum() == 0


def test_assembly_is_deterministic():
    a, _, _ = _sub(seed=2)
    b, _, _ = _sub(seed=2)
    assert a.tags == b.tags
    assert np.array_equal(a.L, b.L) and np.array_equal(a.E, b.E)
    assert np.array_equal(a.start, b.start)


@pytest.mark.parametrize("seed", range(8))
def test_start_is_strictly_feasible(seed):
    for mode in ("sum", "max"):
        sub, _, _ = _sub(seed=seed, mode=mode)
        assert np.all(sub.values(sub.start) < 0)


def test_generous_deadline_needs_no_shrink():
    sc, ch = _one_rsu_scenario(position=1.0)  # 159 m to the boundary
    *_, disabled, steps = start_splits(sc, ch)
    assert steps[0] == 0 and disabled == ()


def test_tight_deadline_shrinks_but_stays_feasible():
    # place the ICV just ahead of the boundary so the deadline is a few ms
    sc, ch = _one_rsu_scenario(position=159.93)
    x_r, _, rsu_on, _, disabled, steps = start_splits(sc, ch)
    assert rsu_on[0] and steps[0] > 0 and x_r[0] < 0.1
    sub = assemble_subproblem(sc, ch, init_local_point(sc, ch))
    assert sub.is_strictly_feasible(sub.start)
    h = sub.tags.index("handoff ICV 0")
    assert sub.values(sub.start)[h] < 0


def test_deadline_below_floor_disables_route():
    sc, ch = _one_rsu_scenario(position=160.0 - 1e-7)
    sub = assemble_subproblem(sc, ch, init_local_point(sc, ch))
    assert sub.disabled_by_handoff == (0,)
    assert not sub.rsu_on[0]
    assert "handoff" not in sub.family_counts()
    assert sub.start[XR] == pytest.approx(math.log(1e-9))
    assert not sub.free[XR]


def test_nonfinite_local_point_rejected():
    sc, ch = instance(0, 2)
    with pytest.raises(ValueError):
        assemble_subproblem(sc, ch, LocalPoint(np.array([0.0, np.nan]), np.zeros(2)))


def _one_dim(scale=1.0):
    rb = _RowBuilder()
    rb.row("test", "exp(-t) <= 1", const=-1.0, terms=((1.0, {0: -1.0}),))
    sub = ConvexSubproblem(dim=1, c=[scale], rb=rb)
    sub.start = np.array([1.0])
    return sub


def test_one_dimensional_analytic_optimum():
    rep = solve(_one_dim())
    assert rep.success
    assert abs(rep.solution[0]) < 1e-8
    assert rep.objective <= 1.0


def test_objective_scaling_leaves_argmin():
    sub, _, _ = _sub(seed=1, n=4)
    base = solve(sub)
    scaled = assemble_subproblem(*instance(1, 4), sub.local_point, sub.options)
    scaled.c = scaled.c * 10
    rep = solve(scaled)
    assert rep.objective == pytest.approx(10 * base.objective, rel=1e-7)
    blk = lambda z: z[: 4 * BLOCK].reshape(4, BLOCK)  # noqa: E731
    assert np.allclose(blk(rep.solution)[:, 0], blk(base.solution)[:, 0], rtol=1e-5, atol=1e-9)


def test_infeasible_start_rejected():
    sub = _one_dim()
    with pytest.raises(InfeasibleStartError):
        solve(sub, start=np.array([-5.0]))


@pytest.mark.parametrize("seed", range(4))
def test_solve_report_invariants(seed):
    for mode in ("sum", "max"):
        sub, _, _ = _sub(seed=seed, mode=mode)
        rep = solve(sub)
        assert rep.success, rep.message
        assert rep.max_violation <= 1e-9
        assert rep.kkt_residual <= 1e-6
        assert rep.objective <= sub.objective(sub.start)
        # non-increasing outer-iteration objectives
        assert np.all(np.diff(rep.objective_trace) <= 1e-9)


def test_newton_cap_reports_failure():
    sub, _, _ = _sub(seed=0, n=4)
    rep = solve(sub, max_newton=3)
    assert not rep.success and rep.hit_newton_cap
    assert rep.newton_steps == 3
    assert sub.is_strictly_feasible(rep.solution)


def test_warm_start_from_central_point():
    sub, _, _ = _sub(seed=0, n=4)
    cold = solve(sub)
    t, z = cold.central[4]
    warm = solve(sub, start=z, t0=t)
    assert warm.newton_steps < cold.newton_steps
    assert warm.objective == pytest.approx(cold.objective, abs=1e-9)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_single_icv_subproblem_against_grid(seed):
    # with the local point at the optimum, one convex solve is the whole story
    from hapsvec.sca import sca_solve

    sc, ch = instance(seed, 1)
    trace = sca_solve(sc, ch, "sum")
    oracle = grid_oracle(sc, ch, resolution=200)
    assert trace.objective <= oracle.objective * 1.01


def test_dump_writes_layout(tmp_path):
    sub, _, _ = _sub(n=2, mode="max")
    path = tmp_path / "sub.json"
    sub.dump(path)
    doc = json.loads(path.read_text())
    assert doc["variables"][:3] == ["T[0]", "xr[0]", "xh[0]"]
    assert doc["variables"][-1] == "Tmax"
    assert len(doc["rows"]) == sub.num_rows
    assert max(doc["start_values"]) < 0


def test_feasible_start_recomputed_matches_assembly():
    sub, sc, ch = _sub(seed=3, n=5)
    assert np.allclose(feasible_start(sub, sc, ch), sub.start)


def test_core_families_listed():
    assert set(CORE_FAMILIES) >= {"bandwidth", "rate_rsu", "delay_haps"}
