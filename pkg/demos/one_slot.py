"""
Solving one decision slot
=========================

Build the default road, draw one set of channels and split every task
across the vehicle, its RSU and the HAPS.
"""

import numpy as np

from hapsvec import ScenarioConfig, generate_scenario, realize_channels, sca_solve
from hapsvec.delay_model import branch_delays
from hapsvec.harness import channel_seed

sc = generate_scenario(ScenarioConfig(), seed=0)
ch = realize_channels(sc, channel_seed(0, 0))

# sum-delay objective; the trace keeps one objective per SCA iteration
trace = sca_solve(sc, ch, "sum")
print("iterations:", trace.iterations, " final sum delay: %.4f s" % trace.objective)
print("first decreases:", np.round(-np.diff(trace.objectives)[:5], 5))

a = trace.allocation
t_l, t_r, t_h = branch_delays(a, ch, sc)
np.set_printoptions(precision=3, suppress=True)
print("local / RSU / HAPS split per ICV:")
print(np.column_stack([1 - a.x_r - a.x_h, a.x_r, a.x_h]))

# every RSU portion finishes before the vehicle leaves the segment
print("handoff slack (s):", sc.handoff_times() - t_r)
