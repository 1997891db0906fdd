from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hapsvec.scenario import (ConfigError, IcvState, RoadConfig, ScenarioConfig, TaskSpec,
                              advance_slot, generate_scenario, handoff_time, iter_slots,
                              scenario_at_slot)


def test_handoff_time_formula():
    assert handoff_time(IcvState(0, 100.0, 30.0), 160.0) == pytest.approx(2.0)
    assert handoff_time(IcvState(0, 170.0, 10.0), 160.0) == pytest.approx(15.0)
    # exactly on a boundary: a whole segment ahead
    assert handoff_time(IcvState(0, 160.0, 20.0), 160.0) == pytest.approx(8.0)


@given(l=st.floats(0, 319.999), v=st.floats(1, 60))
def test_handoff_time_bounds(l, v):
    t = handoff_time(IcvState(0, l, v), 160.0)
    assert 0 < t <= 160.0 / v + 1e-12


def test_handoff_time_rejects_bad_inputs():
    with pytest.raises(ValueError):
        handoff_time(IcvState(0, 1.0, 0.0), 160.0)


def test_default_road_layout():
    road = ScenarioConfig().road()
    assert road.road_length == 320.0
    assert road.haps_horizontal == 160.0
    assert road.num_rsus == 2
    road.validate()


@pytest.mark.parametrize("kwargs", [
    dict(rsu_positions=(240.0, 80.0)),
    dict(rsu_positions=(80.0, 100.0)),
    dict(haps_altitude=0.0),
    dict(road_length=500.0),
    dict(speed=-1.0),
    dict(B_max=0.0),
])
def test_invalid_configs_rejected(kwargs):
    with pytest.raises(ConfigError):
        ScenarioConfig(**kwargs).validate()


def test_generation_is_deterministic_and_valid():
    cfg = ScenarioConfig()
    a, b = generate_scenario(cfg, 3), generate_scenario(cfg, 3)
    assert a == b
    assert generate_scenario(cfg, 4) != a
    assert np.all((a.positions >= 0) & (a.positions < 320))
    assert set(a.eps) <= set(cfg.input_bits_set)
    assert set(a.lam) <= set(cfg.density_set)


def test_association_partitions_fleet():
    sc = generate_scenario(ScenarioConfig(num_icvs=25), 1)
    members = sorted(i for phi in sc.assoc_phi for i in phi)
    assert members == list(range(25))
    for m, phi in enumerate(sc.assoc_phi):
        for i in phi:
            assert 160 * m <= sc.positions[i] < 160 * (m + 1)


def test_advance_moves_and_wraps():
    cfg = ScenarioConfig(num_icvs=4, speed=50.0)
    sc = generate_scenario(cfg, 0)
    nxt = advance_slot(sc, 1.0, 99)
    assert np.allclose(nxt.positions, (sc.positions + 50.0) % 320.0)
    assert nxt.road == sc.road


def test_slot_iteration_matches_direct_lookup():
    cfg = ScenarioConfig(num_icvs=3)
    slots = list(iter_slots(cfg, 7, 4))
    assert [k for k, _ in slots] == [0, 1, 2, 3]
    assert slots[3][1] == scenario_at_slot(cfg, 7, 3)


def test_task_workload():
    assert TaskSpec(500e3, 1000).workload == 5e8


def test_zero_icvs():
    sc = generate_scenario(ScenarioConfig(num_icvs=0), 0)
    assert sc.num_icvs == 0 and all(len(p) == 0 for p in sc.assoc_phi)
