"""
What the handoff row buys
=========================

Drop the RSU deadline rows and count the cycles that would be cut off at
handoff over twenty one-second slots.
"""

from dataclasses import replace

from hapsvec import ScenarioConfig
from hapsvec.channel import realize_channels
from hapsvec.harness import channel_seed, solve_slot
from hapsvec.metrics import scheme
from hapsvec.scenario import iter_slots

cfg = replace(ScenarioConfig(num_icvs=5), speed=50.0)
for name in ("woHAPS", "HRVIN"):
    for enforce in (False, True):
        lost = 0.0
        for k, sc in iter_slots(cfg, 0, 20):
            res = solve_slot(sc, realize_channels(sc, channel_seed(0, k)), scheme(name, enforce))
            lost += res.metrics.failed_workload
        print(f"{name:7} handoff rows {'on ' if enforce else 'off'}: {lost / 1e9:6.2f} Gcycles lost")
