"""Finite-difference and convexity checks for assembled subproblems."""
from __future__ import annotations

import numpy as np

from .convex_core import ConvexSubproblem, SolveReport


def feasible_sample(sub: ConvexSubproblem, report: SolveReport | None, k: int,
                    rng: np.random.Generator) -> list[np.ndarray]:
    """``k`` strictly feasible points spread between the start and the optimum.

    Anchors are the start and the central-path points of ``report``; samples
    are random convex combinations of anchor pairs (the domain is convex),
    jittered where the jitter keeps strict feasibility.
    """
    anchors = [sub.start] + ([z for _, z in report.central] if report is not None else [])
    out = []
    tries = 0
    while len(out) < k and tries < 50 * k:
        tries += 1
        i, j = rng.integers(len(anchors), size=2)
        w = rng.uniform()
        z = w * anchors[i] + (1 - w) * anchors[j]
        jit = z + 1e-3 * rng.standard_normal(z.shape) * np.maximum(np.abs(z), 1e-3)
        jit[~sub.free] = z[~sub.free]
        if sub.is_strictly_feasible(jit):
            z = jit
        if sub.is_strictly_feasible(z):
            out.append(z)
    return out


def _steps(z: np.ndarray) -> np.ndarray:
    return 1e-6 * np.maximum(np.abs(z), 1e-4)


def gradient_errors(sub: ConvexSubproblem, points, rng=None) -> list[float]:
    """Worst per-row relative error of the analytic gradient against central differences."""
    errs = []
    for z in points:
        J = sub.jacobian(z)
        fd = np.zeros_like(J)
        h = _steps(z)
        for j in np.flatnonzero(sub.free):
            e = np.zeros_like(z)
            e[j] = h[j]
            fd[:, j] = (sub.values(z + e) - sub.values(z - e)) / (2 * h[j])
        scale = np.max(np.abs(J[:, sub.free]), axis=1)
        err = np.max(np.abs(fd - J)[:, sub.free], axis=1) / np.maximum(scale, 1e-300)
        errs.append(float(np.max(err)))
    return errs


def hessian_errors(sub: ConvexSubproblem, points, rng: np.random.Generator) -> list[float]:
    """Worst relative error of row Hessian-vector products against differenced gradients."""
    curved = sorted(set(sub.term_row.tolist()) | set(sub.persp_row.tolist()))
    errs = []
    for z in points:
        v = rng.standard_normal(z.shape) * np.maximum(np.abs(z), 1e-4)
        v[~sub.free] = 0
        h = 1e-6
        dJ = (sub.jacobian(z + h * v) - sub.jacobian(z - h * v)) / (2 * h)
        worst = 0.0
        for i in curved:
            Hv = sub.row_hessian(i, z) @ v
            scale = np.max(np.abs(Hv))
            if scale == 0:
                continue
            worst = max(worst, float(np.max(np.abs(dJ[i] - Hv)) / scale))
        errs.append(worst)
    return errs


def midpoint_violations(sub: ConvexSubproblem, points, rng: np.random.Generator,
                        tol: float = 1e-12, pairs: int | None = None) -> dict[str, int]:
    """Rows with ``g(mid) > mean(g) + tol * max(1, |g|)`` counted per family."""
    pts = list(points)
    pairs = pairs or len(pts)
    fam = np.array(sub.families)
    out: dict[str, int] = {}
    for _ in range(pairs):
        a, b = (pts[i] for i in rng.choice(len(pts), size=2, replace=False))
        ga, gb = sub.values(a), sub.values(b)
        gm = sub.values(0.5 * (a + b))
        bound = 0.5 * (ga + gb) + tol * np.maximum(1.0, np.maximum(np.abs(ga), np.abs(gb)))
        for f in fam[gm > bound]:
            out[str(f)] = out.get(str(f), 0) + 1
    return out
