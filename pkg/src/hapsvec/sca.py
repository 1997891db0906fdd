"""Successive convex approximation over the log-space subproblem.

The only nonconvex piece after the exponential change of variables is the
local-computing row, whose concave part ``1 - exp(xr) - exp(xh)`` is
replaced by its tangent plane at the current local point.  Each iterate is
feasible for the next linearisation, so the recorded objective never
increases.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization
from .convex_core import (BH, BLOCK, BR, FH, FR, PH, PR, TAUH, TAUR, XH, XR, AssemblyOptions,
                          ConvexSubproblem, LocalPoint, SolverOptions, SolveReport,
                          assemble_subproblem, solve, start_splits, T)
from .delay_model import Allocation
from .scenario import Scenario


class ConsistencyError(RuntimeError):
    pass


def taylor_local_bound(local_point: LocalPoint, xr_bar, xh_bar):
    """Tangent-plane upper bound of ``1 - exp(xr) - exp(xh)`` at the local point."""
    xr_hat = np.asarray(local_point.xr_hat, dtype=float)
    xh_hat = np.asarray(local_point.xh_hat, dtype=float)
    er, eh = np.exp(xr_hat), np.exp(xh_hat)
    return 1 - er - er * (np.asarray(xr_bar) - xr_hat) - eh - eh * (np.asarray(xh_bar) - xh_hat)


def local_concave_term(xr_bar, xh_bar):
    return 1 - np.exp(xr_bar) - np.exp(xh_bar)


def init_local_point(scenario: Scenario, channels: ChannelRealization,
                     options: AssemblyOptions = AssemblyOptions()) -> LocalPoint:
    x_r, x_h, *_ = start_splits(scenario, channels, options)
    return LocalPoint(np.log(x_r), np.log(x_h))


def to_physical(sub: ConvexSubproblem, z: np.ndarray, scenario: Scenario | None = None,
                tol_feas: float = 1e-9) -> Allocation:
    """Map a log-space solution back to split ratios, shares and delays."""
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise ConsistencyError("solution is not finite")
    n = sub.num_icvs
    blk = z[: BLOCK * n].reshape(n, BLOCK)
    alloc = Allocation(
        x_r=np.exp(blk[:, XR]), x_h=np.exp(blk[:, XH]),
        b_r=blk[:, BR].copy(), b_h=blk[:, BH].copy(),
        p_r=blk[:, PR].copy(), p_h=blk[:, PH].copy(),
        f_r=np.exp(blk[:, FR]), f_h=np.exp(blk[:, FH]),
        T=blk[:, T].copy(), tau_r=np.exp(blk[:, TAUR]), tau_h=np.exp(blk[:, TAUH]),
        rsu_on=sub.rsu_on.copy(), haps_on=sub.haps_on.copy(),
    )
    if scenario is not None:
        viol = alloc.max_violation(scenario)
        if viol > tol_feas:
            raise ConsistencyError(f"allocation violates resource limits by {viol:.3g}")
    return alloc


@dataclass(frozen=True)
class ScaOptions:
    i_max: int = 50
    zeta: float = 1e-6
    warm_start: bool = True
    # warm barrier weight: duality gap about warm_gap_factor times the last decrease
    warm_gap_factor: float = 1.0
    warm_t_max: float = 1e8
    solver: SolverOptions = SolverOptions()


@dataclass
class ScaTrace:
    objectives: list = field(default_factory=list)
    newton_steps: list = field(default_factory=list)
    max_violation: list = field(default_factory=list)
    converged: bool = False
    warning: str = ""
    failed: bool = False
    allocation: Allocation | None = None
    subproblem: ConvexSubproblem | None = None
    solution: np.ndarray | None = None
    reports: list = field(default_factory=list)
    local_bound_ok: list = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.objectives)

    @property
    def objective(self) -> float:
        return self.objectives[-1] if self.objectives else math.nan

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iter", "objective", "newton_steps", "max_violation"])
            for i, (o, k, v) in enumerate(zip(self.objectives, self.newton_steps,
                                               self.max_violation), start=1):
                w.writerow([i, repr(float(o)), k, repr(float(v))])


def _warm_start(prev: ConvexSubproblem, central, sub: ConvexSubproblem, warm_t: float):
    """A stored central point of the previous subproblem, made feasible for ``sub``.

    Only the local rows change between SCA iterations; lifting each ``T``
    by the growth of its local row keeps the old slack everywhere.
    """
    pts = [(t, z) for t, z in central if t <= warm_t]
    if not pts:
        return None
    t, z = pts[-1]
    z = z.copy()
    rows = np.array([f == "local" for f in sub.families])
    lift = np.maximum(0.0, sub.values(z)[rows] - prev.values(z)[rows])
    n = sub.num_icvs
    z[np.arange(n) * BLOCK + T] += lift
    if sub.mode == "max" and n:
        z[-1] += float(np.max(lift))
    if not sub.is_strictly_feasible(z):
        return None
    return t, z


def sca_solve(scenario: Scenario, channels: ChannelRealization, mode: str = "sum",
              options: ScaOptions = ScaOptions(),
              assembly: AssemblyOptions | None = None) -> ScaTrace:
    """Iterate linearise -> solve -> update until the objective stalls."""
    if assembly is None:
        assembly = AssemblyOptions(mode=mode)
    elif assembly.mode != mode:
        assembly = AssemblyOptions(**{**assembly.__dict__, "mode": mode})
    trace = ScaTrace()
    lp = init_local_point(scenario, channels, assembly)
    prev_sub = prev_rep = None
    for it in range(options.i_max):
        sub = assemble_subproblem(scenario, channels, lp, assembly)
        start = t0 = None
        solver_opts = options.solver
        if options.warm_start and len(trace.objectives) >= 2:
            drop = max(trace.objectives[-2] - trace.objectives[-1], 1e-300)
            t_w = min(options.warm_t_max, sub.num_rows / (options.warm_gap_factor * drop))
            warm = _warm_start(prev_sub, prev_rep.central, sub, t_w)
            if warm is not None:
                t0, start = warm
        try:
            rep = None
            if start is not None:
                budget = min(solver_opts.max_newton, 2 * trace.newton_steps[0])
                rep = solve(sub, max_newton=budget, start=start, options=solver_opts, t0=t0)
                if rep.hit_newton_cap:
                    # far from the new central path; restart cold
                    spent = rep.newton_steps
                    rep = solve(sub, options=solver_opts)
                    rep.newton_steps += spent
            if rep is None:
                rep = solve(sub, options=solver_opts)
        except Exception as exc:  # noqa: BLE001
            trace.failed = True
            trace.warning = f"inner solver failed: {exc}"
            break
        if not rep.success and rep.max_violation > solver_opts.tol_feas:
            trace.failed = True
            trace.warning = f"inner solver failed: {rep.message}"
            break
        z = rep.solution
        trace.reports.append(rep)
        trace.objectives.append(rep.objective)
        trace.newton_steps.append(rep.newton_steps)
        trace.max_violation.append(rep.max_violation)
        trace.local_bound_ok.append(_true_local_row_holds(sub, scenario, z))
        trace.subproblem, trace.solution = sub, z
        n = sub.num_icvs
        blk = z[: BLOCK * n].reshape(n, BLOCK)
        lp = LocalPoint(blk[:, XR].copy(), blk[:, XH].copy())
        prev_sub, prev_rep = sub, rep
        if it >= 1 and trace.objectives[-2] - trace.objectives[-1] <= options.zeta:
            trace.converged = True
            if any(r.hit_newton_cap for r in trace.reports):
                trace.warning = "converged-with-warning: inner solver hit its iteration cap"
            break
    if trace.solution is not None:
        trace.allocation = to_physical(trace.subproblem, trace.solution, scenario,
                                       tol_feas=max(options.solver.tol_feas, 1e-9))
    if trace.warning:
        warnings.warn(trace.warning, RuntimeWarning, stacklevel=2)
    return trace


def _true_local_row_holds(sub: ConvexSubproblem, scenario: Scenario, z: np.ndarray,
                          tol: float = 1e-12) -> bool:
    n = sub.num_icvs
    if n == 0:
        return True
    blk = z[: BLOCK * n].reshape(n, BLOCK)
    W = scenario.eps * scenario.lam / scenario.compute_caps[0]
    lhs = W * local_concave_term(blk[:, XR], blk[:, XH])
    return bool(np.all(lhs <= blk[:, T] + tol * np.maximum(1.0, np.abs(blk[:, T]))))
