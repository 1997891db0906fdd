"""
Three schemes on a bandwidth sweep
==================================

HRVIN uses both offload targets; woRSU and woHAPS drop one of them.
A few seeds keep this quick; the acceptance suite uses twenty.
"""

from hapsvec import ExperimentPlan, ScenarioConfig, run_experiment
from hapsvec.metrics import SCHEMES

plan = ExperimentPlan(config=ScenarioConfig(num_icvs=5), axis="bandwidth",
                      values=(5, 15, 25), schemes=tuple(SCHEMES.values()), seeds=(0, 1, 2))
table = run_experiment(plan)

print("MHz   " + "  ".join(f"{n:>7}" for n in SCHEMES))
for mhz in plan.values:
    print(f"{mhz:>4.0f}  " + "  ".join(f"{table.mean('avg_delay', axis_value=mhz, scheme=n):7.4f}"
                                      for n in SCHEMES))

table.write_csv("bandwidth_sweep.csv")
