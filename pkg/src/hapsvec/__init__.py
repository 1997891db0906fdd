"""Handoff-aware task offloading in a HAPS-assisted vehicular network.

Typical use::

    from hapsvec import ScenarioConfig, generate_scenario, realize_channels, sca_solve

    sc = generate_scenario(ScenarioConfig(), seed=0)
    trace = sca_solve(sc, realize_channels(sc, seed=0), mode="sum")
"""
from .channel import ChannelRealization, realize_channels
from .convex_core import AssemblyOptions, SolverOptions, assemble_subproblem, solve
from .delay_model import Allocation, branch_delays, icv_delays
from .harness import ExperimentPlan, emit_convergence_trace, run_experiment, solve_slot
from .metrics import HRVIN, WO_HAPS, WO_RSU, SchemeConfig, jain_fairness, failed_workload
from .oracle import grid_oracle
from .sca import ScaOptions, ScaTrace, sca_solve
from .scenario import ConfigError, Scenario, ScenarioConfig, generate_scenario, iter_slots

__all__ = [
    "Allocation", "AssemblyOptions", "ChannelRealization", "ConfigError", "ExperimentPlan",
    "HRVIN", "ScaOptions", "ScaTrace", "Scenario", "ScenarioConfig", "SchemeConfig",
    "SolverOptions", "WO_HAPS", "WO_RSU", "assemble_subproblem", "branch_delays",
    "emit_convergence_trace", "failed_workload", "generate_scenario", "grid_oracle",
    "icv_delays", "iter_slots", "jain_fairness", "realize_channels", "run_experiment",
    "sca_solve", "solve", "solve_slot",
]
