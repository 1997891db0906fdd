"""Log-space convex subproblem and a log-barrier interior-point solver.

Every constraint row has the form

    g_i(z) = l_i . z + e_i + sum_t c_t exp(a_t . z) - K_i b log2(1 + a_i p / b)

where the exponential terms and the optional rate term belong to the row.
That one shape covers the delay rows, the offloading-rate rows, the
handoff rows and the compute budgets.  Each row touches only a few
variables, so assembly precomputes scatter patterns and a Newton step
builds the dense barrier Hessian with a few ``bincount`` calls.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg.lapack import dpotrf, dpotrs

from .channel import ChannelRealization, link_rate
from .delay_model import X_MIN
from .scenario import Scenario

LN2 = math.log(2.0)

# per-ICV variable block
BLOCK = 11
T, XR, XH, BR, BH, PR, PH, TAUR, TAUH, FR, FH = range(BLOCK)
VAR_NAMES = ("T", "xr", "xh", "br", "bh", "pr", "ph", "taur", "tauh", "fr", "fh")

CORE_FAMILIES = ("bandwidth", "haps_compute", "rsu_compute",
                 "delay_rsu", "delay_haps", "rate_rsu", "rate_haps")


class InfeasibleStartError(RuntimeError):
    pass


@dataclass(frozen=True)
class LocalPoint:
    """Log-space split ratios the local-delay row is linearised at."""

    xr_hat: np.ndarray
    xh_hat: np.ndarray


@dataclass(frozen=True)
class AssemblyOptions:
    mode: str = "sum"
    use_rsu: bool = True
    use_haps: bool = True
    enforce_handoff: bool = True
    x_min: float = X_MIN
    b_min: float = 1e-9
    p_min: float = 1e-9

    def __post_init__(self):
        if self.mode not in ("sum", "max"):
            raise ValueError(f"mode must be 'sum' or 'max', got {self.mode!r}")


@dataclass(frozen=True)
class SmoothConstraint:
    evaluator: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian: Callable[[np.ndarray], np.ndarray]
    tag: str


def idx(n: int, k: int) -> int:
    return BLOCK * n + k


class _RowBuilder:
    def __init__(self):
        self.lin: list[tuple[int, int, float]] = []
        self.const: list[float] = []
        self.terms: list[tuple[int, float]] = []
        self.expo: list[tuple[int, int, float]] = []
        self.persp: list[tuple[int, int, int, float, float]] = []
        self.tags: list[str] = []
        self.families: list[str] = []

    def row(self, family: str, tag: str, lin=None, const=0.0, terms=(), persp=None) -> int:
        r = len(self.tags)
        for k, v in (lin or {}).items():
            self.lin.append((r, k, float(v)))
        self.const.append(float(const))
        for coef, expo in terms:
            t = len(self.terms)
            self.terms.append((r, float(coef)))
            for k, v in expo.items():
                self.expo.append((t, k, float(v)))
        if persp is not None:
            b_i, p_i, K, a = persp
            self.persp.append((r, b_i, p_i, float(K), float(a)))
        self.tags.append(tag)
        self.families.append(family)
        return r


def _columns(rows, kinds):
    if not rows:
        return [np.zeros(0, dtype=k) for k in kinds]
    return [np.asarray(col, dtype=k) for col, k in zip(zip(*rows), kinds)]


def _pairs(owner: np.ndarray, count: int):
    """All (a, b) entry pairs that share an owner (row or exponential term)."""
    order = np.argsort(owner, kind="stable")
    bounds = np.searchsorted(owner[order], np.arange(count + 1))
    A, B = [], []
    for j in range(count):
        ent = order[bounds[j]:bounds[j + 1]]
        if len(ent):
            A.append(np.repeat(ent, len(ent)))
            B.append(np.tile(ent, len(ent)))
    if not A:
        return np.zeros(0, int), np.zeros(0, int)
    return np.concatenate(A), np.concatenate(B)


class ConvexSubproblem:
    """Minimise ``c . z`` subject to ``g(z) < 0`` over the log-space variables.

    ``free`` marks the variables the solver may move.  Pinned variables
    belong to disabled routes and keep their value in ``start``.
    """

    def __init__(self, *, dim, c, rb: _RowBuilder, free=None, num_icvs=0, num_rsus=0,
                 mode="sum", rsu_on=None, haps_on=None, local_point=None,
                 options=AssemblyOptions(), disabled_by_handoff=(), shrink_steps=None,
                 pinned=None):
        self.dim = int(dim)
        self.c = np.asarray(c, dtype=float)
        self.num_icvs = num_icvs
        self.num_rsus = num_rsus
        self.mode = mode
        self.free = np.ones(self.dim, bool) if free is None else np.asarray(free, dtype=bool)
        self.rsu_on = np.ones(num_icvs, bool) if rsu_on is None else rsu_on
        self.haps_on = np.ones(num_icvs, bool) if haps_on is None else haps_on
        self.local_point = local_point
        self.options = options
        self.disabled_by_handoff = tuple(disabled_by_handoff)
        self.shrink_steps = shrink_steps
        self.start = np.zeros(self.dim) if pinned is None else np.asarray(pinned, float).copy()
        self.tags = tuple(rb.tags)
        self.families = tuple(rb.families)
        self.e = np.asarray(rb.const, dtype=float)
        r, d = self.num_rows, self.dim

        self.Lr, self.Lc, self.Lv = _columns(rb.lin, (int, int, float))
        self.term_row, self.coef = _columns(rb.terms, (int, float))
        self.Et, self.Ec, self.Ev = _columns(rb.expo, (int, int, float))
        (self.persp_row, self.persp_b, self.persp_p,
         self.persp_K, self.persp_a) = _columns(rb.persp, (int, int, int, float, float))
        q = len(self.coef)

        # Jacobian sparsity: every (row, column) pair any piece touches
        flat = np.concatenate([
            self.Lr * d + self.Lc,
            self.term_row[self.Et] * d + self.Ec,
            self.persp_row * d + self.persp_b,
            self.persp_row * d + self.persp_p,
        ]).astype(int)
        keys, inv = np.unique(flat, return_inverse=True)
        self.Jr, self.Jc = keys // d, keys % d
        nL, nE, nP = len(self.Lr), len(self.Et), len(self.persp_row)
        self._map_E = inv[nL:nL + nE]
        self._map_Pb = inv[nL + nE:nL + nE + nP]
        self._map_Pp = inv[nL + nE + nP:]
        self._J_lin = np.bincount(inv[:nL], weights=self.Lv, minlength=len(keys)).astype(float)

        self._pA, self._pB = _pairs(self.Jr, r)
        self._p_row = self.Jr[self._pA]
        self._tA, self._tB = _pairs(self.Et, q)
        self._t_term = self.Et[self._tA]
        self._t_val = self.Ev[self._tA] * self.Ev[self._tB]
        pb, pp = self.persp_b, self.persp_p
        self._H_flat = np.concatenate([
            self.Jc[self._pA] * d + self.Jc[self._pB],
            self.Ec[self._tA] * d + self.Ec[self._tB],
            pb * d + pb, pp * d + pp, pb * d + pp, pp * d + pb,
        ]).astype(int)

        lin = np.ones(r, dtype=bool)
        lin[self.term_row] = False
        lin[self.persp_row] = False
        self._lin_rows = lin

    # -- shape ----------------------------------------------------------------
    @property
    def num_rows(self) -> int:
        return len(self.e)

    def family_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for f in self.families:
            out[f] = out.get(f, 0) + 1
        return out

    @property
    def core_count(self) -> int:
        counts = self.family_counts()
        return sum(counts.get(f, 0) for f in CORE_FAMILIES)

    @property
    def L(self) -> np.ndarray:
        L = np.zeros((self.num_rows, self.dim))
        np.add.at(L, (self.Lr, self.Lc), self.Lv)
        return L

    @property
    def E(self) -> np.ndarray:
        E = np.zeros((len(self.coef), self.dim))
        np.add.at(E, (self.Et, self.Ec), self.Ev)
        return E

    def linear_rows(self) -> np.ndarray:
        return self._lin_rows.copy()

    # -- evaluation -------------------------------------------------------------
    def _exp_terms(self, z):
        expo = np.bincount(self.Et, weights=self.Ev * z[self.Ec], minlength=len(self.coef))
        return self.coef * np.exp(expo)

    def _linear_part(self, z):
        lin = np.bincount(self.Lr, weights=self.Lv * z[self.Lc], minlength=self.num_rows)
        return np.asarray(lin, dtype=float) + self.e

    def values(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        g = self._linear_part(z)
        if len(self.coef):
            g += np.bincount(self.term_row, weights=self._exp_terms(z), minlength=self.num_rows)
        if len(self.persp_row):
            b = z[self.persp_b]
            with np.errstate(invalid="ignore", divide="ignore"):
                h = self.persp_K * b * np.log(1.0 + self.persp_a * z[self.persp_p] / b) / LN2
            g[self.persp_row] -= h
        return g

    def objective(self, z: np.ndarray) -> float:
        return float(self.c @ z)

    def _derivatives(self, z):
        """Row values, Jacobian nonzeros, exp-term values and rate-term curvature."""
        g = self._linear_part(z)
        Jd = self._J_lin.copy()
        u = np.zeros(0)
        if len(self.coef):
            u = self._exp_terms(z)
            g += np.bincount(self.term_row, weights=u, minlength=self.num_rows)
            Jd += np.bincount(self._map_E, weights=u[self.Et] * self.Ev, minlength=len(Jd))
        k = ratio = None
        if len(self.persp_row):
            b, p = z[self.persp_b], z[self.persp_p]
            K, a = self.persp_K, self.persp_a
            s = 1.0 + a * p / b
            ls = np.log(s)
            g[self.persp_row] -= K * b * ls / LN2
            Jd[self._map_Pb] -= K / LN2 * (ls - (s - 1) / s)
            Jd[self._map_Pp] -= K * a / (s * LN2)
            # -h has Hessian k v v^T with v = (p/b, -1)
            k = K * a * a / (b * s * s * LN2)
            ratio = p / b
        return g, Jd, u, k, ratio

    def jacobian(self, z: np.ndarray) -> np.ndarray:
        Jd = self._derivatives(np.asarray(z, dtype=float))[1]
        J = np.zeros((self.num_rows, self.dim))
        J[self.Jr, self.Jc] = Jd
        return J

    def row_hessian(self, i: int, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        H = np.zeros((self.dim, self.dim))
        E = self.E
        sel = np.flatnonzero(self.term_row == i)
        if len(sel):
            Es = E[sel]
            u = self.coef[sel] * np.exp(Es @ z)
            H += Es.T @ (u[:, None] * Es)
        for j in np.flatnonzero(self.persp_row == i):
            bi, pi = self.persp_b[j], self.persp_p[j]
            b, p = z[bi], z[pi]
            s = 1 + self.persp_a[j] * p / b
            k = self.persp_K[j] * self.persp_a[j] ** 2 / (b * s * s * LN2)
            v = np.zeros(self.dim)
            v[bi], v[pi] = p / b, -1.0
            H += k * np.outer(v, v)
        return H

    def barrier_system(self, z: np.ndarray, t: float):
        """Row values, gradient and Hessian of ``t c.z - sum log(-g)``."""
        g, Jd, u, k, ratio = self._derivatives(z)
        w = 1.0 / (-g)
        grad = t * self.c + np.bincount(self.Jc, weights=Jd * w[self.Jr], minlength=self.dim)
        parts = [(w * w)[self._p_row] * Jd[self._pA] * Jd[self._pB]]
        if len(u):
            parts.append((u * w[self.term_row])[self._t_term] * self._t_val)
        if k is not None:
            kw = k * w[self.persp_row]
            parts += [kw * ratio * ratio, kw, -kw * ratio, -kw * ratio]
        H = np.bincount(self._H_flat, weights=np.concatenate(parts),
                        minlength=self.dim * self.dim).reshape(self.dim, self.dim)
        return g, grad, H

    def linear_step(self, dz: np.ndarray):
        """``L dz`` on the purely linear rows, for the fraction-to-boundary rule."""
        d = np.bincount(self.Lr, weights=self.Lv * dz[self.Lc], minlength=self.num_rows)
        return d[self._lin_rows]

    def constraint(self, i: int) -> SmoothConstraint:
        return SmoothConstraint(
            evaluator=lambda z: float(self.values(z)[i]),
            gradient=lambda z: self.jacobian(z)[i].copy(),
            hessian=lambda z: self.row_hessian(i, z),
            tag=self.tags[i],
        )

    def constraints(self) -> list[SmoothConstraint]:
        return [self.constraint(i) for i in range(self.num_rows)]

    def is_strictly_feasible(self, z: np.ndarray) -> bool:
        g = self.values(z)
        return bool(np.all(np.isfinite(g)) and np.all(g < 0))

    def dump(self, path) -> None:
        """Write layout, row tags and start point as JSON."""
        n = self.num_icvs
        layout = [f"{VAR_NAMES[k]}[{i}]" for i in range(n) for k in range(BLOCK)]
        if self.mode == "max":
            layout.append("Tmax")
        doc = {
            "mode": self.mode,
            "num_icvs": n,
            "num_rsus": self.num_rsus,
            "variables": layout,
            "free": self.free.tolist(),
            "objective": self.c.tolist(),
            "rows": [{"tag": t, "family": f} for t, f in zip(self.tags, self.families)],
            "start": self.start.tolist(),
            "start_values": self.values(self.start).tolist(),
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=1)


# -- assembly -------------------------------------------------------------------

def _start_allocation(scenario: Scenario, channels: ChannelRealization, rsu_on, haps_on,
                      opts: AssemblyOptions):
    """Split-free part of the constructive start (radio and compute shares)."""
    n = scenario.num_icvs
    b0 = np.full(n, 0.9 / (2 * max(n, 1)))
    p0 = np.full(n, 0.45)
    f_r0 = np.zeros(n)
    for members in scenario.assoc_phi:
        on = [i for i in members if rsu_on[i]]
        if on:
            f_r0[on] = 0.9 / len(on)
    f_h0 = np.full(n, 0.9 / max(int(np.sum(haps_on)), 1))
    B, P, N0 = scenario.radio_caps
    rate_r = link_rate(b0, B, p0, P, channels.gain_rsu, N0) if n else np.zeros(0)
    rate_h = link_rate(b0, B, p0, P, channels.gain_haps, N0) if n else np.zeros(0)
    return b0, p0, f_r0, f_h0, rate_r, rate_h


def _rsu_branch(x, eps, lam, rate, f, F_R, prop):
    """RSU handoff-row value at the constructive start (tau = 2x offload time)."""
    return prop + 2 * x * eps / rate + x * eps * lam / (f * F_R)


def _shrunk_rsu_split(x0, deadline, eps, lam, rate, f, F_R, prop, x_min):
    x = x0
    steps = 0
    while _rsu_branch(x, eps, lam, rate, f, F_R, prop) >= deadline:
        if x <= x_min:
            return None, steps
        x = max(x / 2, x_min)
        steps += 1
    return x, steps


def start_splits(scenario: Scenario, channels: ChannelRealization,
                 options: AssemblyOptions = AssemblyOptions()):
    """Constructive start splits and the RSU routes that must be disabled.

    Returns ``(x_r, x_h, rsu_on, haps_on, disabled_by_handoff, shrink_steps)``.
    """
    n = scenario.num_icvs
    rsu_on = np.full(n, bool(options.use_rsu))
    haps_on = np.full(n, bool(options.use_haps))
    x_h = np.where(haps_on, 0.1, options.x_min)
    steps = np.zeros(n, dtype=int)
    disabled: list[int] = []
    if not (options.use_rsu and options.enforce_handoff and n):
        return np.where(rsu_on, 0.1, options.x_min), x_h, rsu_on, haps_on, (), steps
    deadlines = scenario.handoff_times()
    eps, lam = scenario.eps, scenario.lam
    F_R = scenario.compute_caps[1]
    # second pass: disabling a route only enlarges the others' compute shares
    for _ in range(2):
        x_r = np.where(rsu_on, 0.1, options.x_min)
        _, _, f_r0, _, rate_r, _ = _start_allocation(scenario, channels, rsu_on, haps_on, options)
        for i in np.flatnonzero(rsu_on):
            x, k = _shrunk_rsu_split(0.1, deadlines[i], eps[i], lam[i], rate_r[i], f_r0[i],
                                     F_R, channels.prop_delay_rsu[i], options.x_min)
            steps[i] = k
            if x is None:
                disabled.append(int(i))
            else:
                x_r[i] = x
        if not disabled or not np.any(rsu_on[disabled]):
            break
        rsu_on[disabled] = False
    x_r = np.where(rsu_on, x_r, options.x_min)
    return x_r, x_h, rsu_on, haps_on, tuple(sorted(set(disabled))), steps


def assemble_subproblem(scenario: Scenario, channels: ChannelRealization,
                        local_point: LocalPoint, options: AssemblyOptions = AssemblyOptions(),
                        ) -> ConvexSubproblem:
    """Build the convex subproblem linearised at ``local_point``."""
    if not (np.all(np.isfinite(local_point.xr_hat)) and np.all(np.isfinite(local_point.xh_hat))):
        raise ValueError("local point must be finite")
    n = scenario.num_icvs
    M = scenario.road.num_rsus
    F_L, F_R, F_H = scenario.compute_caps
    B, P, N0 = scenario.radio_caps
    eps, lam = scenario.eps, scenario.lam
    deadlines = scenario.handoff_times()
    x_r0, x_h0, rsu_on, haps_on, disabled, steps = start_splits(scenario, channels, options)
    lxmin = math.log(options.x_min)

    dim = BLOCK * n + (1 if options.mode == "max" else 0)
    rb = _RowBuilder()
    free = np.ones(dim, dtype=bool)
    pinned = np.zeros(dim)

    for i in range(n):
        W = eps[i] * lam[i] / F_L
        xr_hat, xh_hat = float(local_point.xr_hat[i]), float(local_point.xh_hat[i])
        if not rsu_on[i]:
            xr_hat = lxmin
        if not haps_on[i]:
            xh_hat = lxmin
        er, eh = math.exp(xr_hat), math.exp(xh_hat)
        rb.row("local", f"local-linearized ICV {i}",
               lin={idx(i, XR): -W * er, idx(i, XH): -W * eh, idx(i, T): -1.0},
               const=W * (1 - er * (1 - xr_hat) - eh * (1 - xh_hat)))
        for on, route, X, Bv, Pv, TAU, Fv, gain, prop, Fcap in (
            (rsu_on[i], "rsu", XR, BR, PR, TAUR, FR, channels.gain_rsu[i],
             channels.prop_delay_rsu[i], F_R),
            (haps_on[i], "haps", XH, BH, PH, TAUH, FH, channels.gain_haps[i],
             channels.prop_delay_haps[i], F_H),
        ):
            if not on:
                for k, val in ((X, lxmin), (Bv, 0.0), (Pv, 0.0), (TAU, 0.0), (Fv, lxmin)):
                    free[idx(i, k)] = False
                    pinned[idx(i, k)] = val
                continue
            C = eps[i] * lam[i] / Fcap
            delay_terms = ((1.0, {idx(i, TAU): 1.0}),
                           (C, {idx(i, X): 1.0, idx(i, Fv): -1.0}))
            rb.row(f"delay_{route}", f"delay-{route.upper()} ICV {i}",
                   lin={idx(i, T): -1.0}, const=prop, terms=delay_terms)
            rb.row(f"rate_{route}", f"rate-{route.upper()} ICV {i}",
                   terms=((1.0, {idx(i, X): 1.0, idx(i, TAU): -1.0}),),
                   persp=(idx(i, Bv), idx(i, Pv), B / eps[i], P * gain / (B * N0)))
            if route == "rsu" and options.enforce_handoff:
                rb.row("handoff", f"handoff ICV {i}", const=prop - deadlines[i],
                       terms=delay_terms)
            rb.row("box", f"b-{route} floor ICV {i}", lin={idx(i, Bv): -1.0}, const=options.b_min)
            rb.row("box", f"p-{route} floor ICV {i}", lin={idx(i, Pv): -1.0}, const=options.p_min)
            rb.row("box", f"x-{route} floor ICV {i}", lin={idx(i, X): -1.0}, const=lxmin)
        if rsu_on[i] or haps_on[i]:
            rb.row("power", f"power ICV {i}",
                   lin={idx(i, k): 1.0 for k, on in ((PR, rsu_on[i]), (PH, haps_on[i])) if on},
                   const=-1.0)
            rb.row("split", f"split ICV {i}",
                   terms=tuple((1.0, {idx(i, k): 1.0})
                               for k, on in ((XR, rsu_on[i]), (XH, haps_on[i])) if on),
                   const=-1.0 + sum(options.x_min for on in (rsu_on[i], haps_on[i]) if not on))
        if options.mode == "max":
            rb.row("epigraph", f"epigraph ICV {i}", lin={idx(i, T): 1.0, dim - 1: -1.0})

    bw = {idx(i, k): 1.0 for i in range(n) for k, on in ((BR, rsu_on[i]), (BH, haps_on[i])) if on}
    if bw:
        rb.row("bandwidth", "bandwidth", lin=bw, const=-1.0)
    if np.any(haps_on):
        rb.row("haps_compute", "compute-HAPS",
               terms=tuple((1.0, {idx(i, FH): 1.0}) for i in range(n) if haps_on[i]), const=-1.0)
    for m, members in enumerate(scenario.assoc_phi):
        on = [i for i in members if rsu_on[i]]
        if on:
            rb.row("rsu_compute", f"compute-RSU {m}",
                   terms=tuple((1.0, {idx(i, FR): 1.0}) for i in on), const=-1.0)

    c = np.zeros(dim)
    if options.mode == "sum":
        c[[idx(i, T) for i in range(n)]] = 1.0
    else:
        c[dim - 1] = 1.0

    sub = ConvexSubproblem(
        dim=dim, c=c, rb=rb, free=free, num_icvs=n, num_rsus=M, mode=options.mode,
        rsu_on=rsu_on, haps_on=haps_on, local_point=local_point, options=options,
        disabled_by_handoff=disabled, shrink_steps=steps, pinned=pinned,
    )
    sub.start = feasible_start(sub, scenario, channels, splits=(x_r0, x_h0))
    return sub


def feasible_start(sub: ConvexSubproblem, scenario: Scenario, channels: ChannelRealization,
                   splits=None) -> np.ndarray:
    """Constructive strictly feasible point for ``sub``."""
    n = scenario.num_icvs
    opts = sub.options
    F_L, F_R, F_H = scenario.compute_caps
    eps, lam = scenario.eps, scenario.lam
    if splits is None:
        x_r0, x_h0, *_ = start_splits(scenario, channels, opts)
    else:
        x_r0, x_h0 = splits
    b0, p0, f_r0, f_h0, rate_r, rate_h = _start_allocation(
        scenario, channels, sub.rsu_on, sub.haps_on, opts)
    z = sub.start.copy()
    lp = sub.local_point
    for i in range(n):
        W = eps[i] * lam[i] / F_L
        branches = []
        for on, X, Bv, Pv, TAU, Fv, x, rate, f, Fcap, prop in (
            (sub.rsu_on[i], XR, BR, PR, TAUR, FR, x_r0[i], rate_r[i], f_r0[i], F_R,
             channels.prop_delay_rsu[i]),
            (sub.haps_on[i], XH, BH, PH, TAUH, FH, x_h0[i], rate_h[i], f_h0[i], F_H,
             channels.prop_delay_haps[i]),
        ):
            if not on:
                continue
            tau = 2 * x * eps[i] / rate
            z[idx(i, X)] = math.log(x)
            z[idx(i, Bv)] = b0[i]
            z[idx(i, Pv)] = p0[i]
            z[idx(i, TAU)] = math.log(tau)
            z[idx(i, Fv)] = math.log(f)
            branches.append(prop + tau + x * eps[i] * lam[i] / (f * Fcap))
        xr_hat = lp.xr_hat[i] if sub.rsu_on[i] else z[idx(i, XR)]
        xh_hat = lp.xh_hat[i] if sub.haps_on[i] else z[idx(i, XH)]
        g_hat = (1 - math.exp(xr_hat) * (1 + z[idx(i, XR)] - xr_hat)
                 - math.exp(xh_hat) * (1 + z[idx(i, XH)] - xh_hat))
        branches.append(W * g_hat)
        z[idx(i, T)] = 2 * max(branches)
    if sub.mode == "max":
        z[-1] = 1.1 * max(z[idx(i, T)] for i in range(n)) if n else 1.0
    if not sub.is_strictly_feasible(z):
        g = sub.values(z)
        bad = [sub.tags[j] for j in np.flatnonzero(~(g < 0))]
        raise InfeasibleStartError(f"constructed start violates {bad[:5]}")
    return z


# -- solver ---------------------------------------------------------------------

@dataclass(frozen=True)
class SolverOptions:
    t0: float = 1.0
    mu: float = 10.0
    newton_tol: float = 1e-8
    alpha: float = 0.25
    beta: float = 0.5
    boundary_fraction: float = 0.99
    gap_tol: float = 1e-10
    tol_feas: float = 1e-9
    tol_kkt: float = 1e-6
    max_newton: int = 2000
    # below this decrement, a step that fails to halve it means rounding has won
    stall_decrement: float = 1e-3


@dataclass
class SolveReport:
    solution: np.ndarray
    objective: float
    outer_iterations: int
    newton_steps: int
    max_violation: float
    kkt_residual: float
    success: bool
    message: str = ""
    objective_trace: list = field(default_factory=list)
    hit_newton_cap: bool = False
    central: list = field(default_factory=list)


def _newton_direction(H: np.ndarray, grad: np.ndarray) -> np.ndarray:
    d = np.sqrt(np.maximum(np.diag(H), 1e-300))
    Hs = H / np.outer(d, d)
    gs = grad / d
    for reg in (0.0, 1e-12, 1e-9, 1e-6):
        A = Hs + reg * np.eye(len(d)) if reg else Hs
        c, info = dpotrf(A, lower=False, clean=False, overwrite_a=False)
        if info == 0:
            x, info = dpotrs(c, gs, lower=False)
            if info == 0:
                return -x / d
    return -np.linalg.lstsq(Hs, gs, rcond=None)[0] / d


def solve(sub: ConvexSubproblem, tol_kkt: float | None = None, max_newton: int | None = None,
          start: np.ndarray | None = None, options: SolverOptions = SolverOptions(),
          t0: float | None = None) -> SolveReport:
    """Minimise the linear objective of ``sub`` with a log-barrier method.

    ``start`` must be strictly feasible.  Passing a central point of a
    nearby problem together with its barrier weight as ``t0`` skips the
    early outer iterations.  Each centred point is kept in ``central``.
    """
    tol_kkt = options.tol_kkt if tol_kkt is None else tol_kkt
    max_newton = options.max_newton if max_newton is None else max_newton
    z = (sub.start if start is None else start).astype(float).copy()
    if not sub.is_strictly_feasible(z):
        raise InfeasibleStartError("start point is not strictly feasible")
    free = sub.free
    all_free = bool(np.all(free))
    ff = np.ix_(free, free)
    m = sub.num_rows
    t = float(options.t0 if t0 is None else t0)
    newton = outer = 0
    trace = []  # objective at each centred point
    central = []
    hit_cap = False
    message = ""
    while True:
        outer += 1
        prev = math.inf
        while True:
            g, grad_all, H_all = sub.barrier_system(z, t)
            grad = grad_all if all_free else grad_all[free]
            dz_f = _newton_direction(H_all if all_free else H_all[ff], grad)
            lam2 = float(-grad @ dz_f)
            if not np.isfinite(lam2) or lam2 / 2 <= options.newton_tol:
                break
            if lam2 < options.stall_decrement and lam2 > 0.5 * prev:
                break
            if newton >= max_newton:
                hit_cap = True
                break
            prev = lam2
            newton += 1
            dz = np.zeros_like(z)
            dz[free] = dz_f
            s = 1.0
            dl = sub.linear_step(dz)
            gl = g[sub._lin_rows]
            pos = dl > 0
            if np.any(pos):
                s = min(1.0, options.boundary_fraction * float(np.min(-gl[pos] / dl[pos])))
            slope = float(grad @ dz_f)
            cdz = float(sub.c @ dz)
            accepted = False
            while s >= 1e-12:
                g_new = sub.values(z + s * dz)
                if np.all(np.isfinite(g_new)) and np.all(g_new < 0):
                    dphi = t * s * cdz - float(np.sum(np.log(g_new / g)))
                    if dphi <= options.alpha * s * slope:
                        accepted = True
                        break
                s *= options.beta
            if not accepted:
                # the barrier is only resolved to about t*1e-16, so an
                # unrealisable small decrement means centred to precision
                if lam2 > 1e-2:
                    message = "line search failed"
                break
            z = z + s * dz
        trace.append(sub.objective(z))
        central.append((t, z.copy()))
        if hit_cap or message or m / t <= options.gap_tol:
            break
        t *= options.mu

    # multiplier estimate of the last Newton system, first order in the step
    g, grad_all, H_all = sub.barrier_system(z, t)
    dz = np.zeros_like(z)
    if np.any(free):
        dz[free] = _newton_direction(H_all[ff], grad_all[free])
    J = sub.jacobian(z)
    w = 1.0 / (-g)
    lam_dual = np.maximum(0.0, w + w * w * (J @ dz)) / t
    r = sub.c + J.T @ lam_dual
    kkt = float(np.max(np.abs(r[free]))) if np.any(free) else 0.0
    viol = float(max(0.0, np.max(g))) if m else 0.0
    success = (not hit_cap) and not message and viol <= options.tol_feas and kkt <= tol_kkt
    if hit_cap:
        message = "Newton step limit reached"
    elif not success and not message:
        message = "tolerances not met"
    return SolveReport(
        solution=z, objective=sub.objective(z), outer_iterations=outer, newton_steps=newton,
        max_violation=viol, kkt_residual=kkt, success=success, message=message,
        objective_trace=trace, hit_newton_cap=hit_cap, central=central,
    )
