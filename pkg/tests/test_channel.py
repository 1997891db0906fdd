import numpy as np
import pytest

from hapsvec.channel import (free_space_beta0, link_rate, los_gain, nlos_gain,
                             realize_channels, sample_fading)
from hapsvec.scenario import SPEED_OF_LIGHT, ScenarioConfig, generate_scenario


def test_beta0_is_unit_distance_free_space_loss():
    assert free_space_beta0(2e9) == pytest.approx((3e8 / (4 * np.pi * 2e9)) ** 2)
    assert free_space_beta0(2e9) == pytest.approx(1.4248e-4, rel=1e-4)


@pytest.mark.parametrize("kind", ["rayleigh", "rician"])
def test_fading_power_has_unit_mean(kind):
    h = sample_fading(kind, seed=2024, size=10**6)
    assert abs(h.mean() - 1) < 0.01
    assert np.all(h >= 0)


def test_rician_is_less_spread_than_rayleigh():
    ray = sample_fading("rayleigh", 1, 10**5)
    ric = sample_fading("rician", 1, 10**5, K_dB=10)
    assert ric.var() < ray.var()
    # |h|^2 variance for Rician K: (2K+1)/(K+1)^2
    K = 10.0
    assert ric.var() == pytest.approx((2 * K + 1) / (K + 1) ** 2, rel=0.03)


def test_unknown_fading_kind():
    with pytest.raises(ValueError):
        sample_fading("nakagami", 0, 10)


def test_gains_match_closed_forms():
    assert nlos_gain(10.0, 2.0, 1e-4, 1.0) == pytest.approx(1e-6)
    d, fc, G = 2e4, 2e9, 50.0
    assert los_gain(d, fc, G, 2.0) == pytest.approx(2 * G * (3e8 / (4 * np.pi * d * fc)) ** 2)
    with pytest.raises(ValueError):
        nlos_gain(0.0, 3.7, 1e-4, 1.0)


def test_link_rate_shannon():
    r = link_rate(0.5, 20e6, 1.0, 0.2, 1e-9, 1e-20)
    bw = 10e6
    assert r == pytest.approx(bw * np.log2(1 + 0.2 * 1e-9 / (bw * 1e-20)))
    with pytest.raises(ValueError):
        link_rate(0.0, 20e6, 1.0, 0.2, 1e-9, 1e-20)


def test_rate_increases_with_bandwidth_and_power():
    b = np.linspace(0.01, 1, 50)
    r = link_rate(b, 20e6, 0.5, 0.2, 1e-10, 4e-21)
    assert np.all(np.diff(r) > 0)
    p = np.linspace(0.01, 1, 50)
    assert np.all(np.diff(link_rate(0.3, 20e6, p, 0.2, 1e-10, 4e-21)) > 0)


def test_realized_geometry():
    sc = generate_scenario(ScenarioConfig(num_icvs=30), 5)
    ch = realize_channels(sc, 5)
    rsu_x = np.array([80.0, 240.0])[sc.rsu_of()]
    assert np.allclose(ch.d_rsu, np.maximum(np.abs(sc.positions - rsu_x), 1.0))
    assert np.allclose(ch.d_haps, np.hypot(2e4, sc.positions - 160.0))
    assert np.allclose(ch.prop_delay_haps, ch.d_haps / SPEED_OF_LIGHT)
    assert np.all(ch.gain_rsu > 0) and np.all(ch.gain_haps > 0)
    again = realize_channels(sc, 5)
    assert np.array_equal(again.gain_rsu, ch.gain_rsu)
