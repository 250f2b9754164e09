"""Exact (nonlinear) minimal perturbations and supporting iterations.

* :func:`frozen_levelset_solve` moves a point onto a level set of
  ``F(., x)`` with corrections computed from the y-Jacobian frozen at a
  reference point, each correction being the minimum-norm one.
* :func:`project_to_root` uses it to produce a root near ``y0``.
* :func:`mu_f` computes ``min ||y - y0||`` over roots of ``F(., x)`` by a
  sequence of linearized minimum-norm problems.
* :func:`brute_force_mu_f` is a grid-search oracle for small m that shares
  no code with the solvers above.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import NoConvergence, NoFeasiblePoint, RankDeficient
from .linalg import householder_qr, least_norm_solve
from .problems import AnchoredProblem
from .system import Anchor, ParameterizedSystem

MAX_ITER = 200
RESIDUAL_TOL = 1e-11
STEP_TOL = 1e-12
LEVELSET_TOL = 1e-12


@dataclass
class SolveTrace:
    """History of one iterative solve.

    ``rate_estimate`` is the largest ratio of successive step norms among
    steps that are still above the rounding floor; it estimates the
    contraction factor of a linearly convergent iteration.
    """

    iterates: list = field(default_factory=list)
    residual_norms: list = field(default_factory=list)
    step_norms: list = field(default_factory=list)
    converged: bool = False
    rate_estimate: float = 0.0
    method: str = ""
    kkt_residual: float | None = None
    nonunique: bool | None = None

    @property
    def iterations(self) -> int:
        return len(self.step_norms)

    def record(self, y, residual_norm, step_norm=None):
        self.iterates.append(np.array(y, dtype=float))
        self.residual_norms.append(float(residual_norm))
        if step_norm is not None:
            self.step_norms.append(float(step_norm))

    def finish(self, converged: bool, scale: float) -> "SolveTrace":
        self.converged = converged
        floor = 1e-10 * (1.0 + scale)
        steps = self.step_norms
        ratios = [b / a for a, b in zip(steps, steps[1:]) if a > floor]
        self.rate_estimate = max(ratios) if ratios else 0.0
        return self


class MuFSolution(NamedTuple):
    value: float
    y_star: np.ndarray
    trace: SolveTrace


def frozen_levelset_solve(sys: ParameterizedSystem, x, target, y_init, y_ref=None,
                          max_iter: int = MAX_ITER, trust_radius: float | None = None):
    """Solve ``F(y, x) = target`` with the y-Jacobian frozen at ``y_ref``.

    Iterates ``y <- y + w`` where ``w`` is the minimum-norm solution of
    ``K w = -(F(y, x) - target)`` and ``K = d_y F(y_ref, x)``.  Convergence
    is geometric when x and target are close enough to ``(y_ref, F(y_ref, x))``.

    Parameters
    ----------
    sys : ParameterizedSystem
    x : array_like, shape (n,)
    target : array_like, shape (p,)
    y_init : array_like, shape (m,)
        Starting point.
    y_ref : array_like, optional
        Where the Jacobian is frozen; defaults to ``y_init``.
    max_iter : int
    trust_radius : float, optional
        Reject starting points farther than this from ``y_ref``.

    Returns
    -------
    y_f : ndarray
    trace : SolveTrace

    Raises
    ------
    NoConvergence
        After ``max_iter`` iterations, on divergence, or on stagnation above
        the tolerance ``1e-12 * (1 + ||target||)``.
    RankDeficient
        If the frozen Jacobian does not have full row rank.
    """
    x = np.asarray(x, dtype=float)
    target = np.asarray(target, dtype=float).ravel()
    y = np.array(y_init, dtype=float).ravel()
    y_ref = y.copy() if y_ref is None else np.array(y_ref, dtype=float).ravel()
    if trust_radius is not None and np.linalg.norm(y - y_ref) > trust_radius:
        raise ValueError("starting point lies outside the trust radius")

    k = sys.jacobian_y(y_ref, x)
    factors = householder_qr(k.T)
    tol = LEVELSET_TOL * (1.0 + np.linalg.norm(target))
    scale = float(np.linalg.norm(y_ref))
    blowup = 1e6 * (1.0 + scale)

    trace = SolveTrace(method="frozen")
    res = sys(y, x) - target
    trace.record(y, np.linalg.norm(res))
    for _ in range(max_iter):
        if trace.residual_norms[-1] <= tol:
            return y, trace.finish(True, scale)
        w = least_norm_solve(k, -res, factors)
        step = float(np.linalg.norm(w))
        y = y + w
        res = sys(y, x) - target
        trace.record(y, np.linalg.norm(res), step)
        if not np.all(np.isfinite(y)) or np.linalg.norm(y - y_ref) > blowup:
            raise NoConvergence("frozen-Jacobian iteration diverged", trace.finish(False, scale))
        if step <= 1e-15 * (1.0 + np.linalg.norm(y)) and trace.residual_norms[-1] > tol:
            raise NoConvergence("frozen-Jacobian iteration stagnated above tolerance",
                                trace.finish(False, scale))
    if trace.residual_norms[-1] <= tol:
        return y, trace.finish(True, scale)
    raise NoConvergence(f"no convergence in {max_iter} iterations", trace.finish(False, scale))


def _gauss_newton_root(sys, x, y_init, max_iter):
    # minimum-norm Newton steps with the current Jacobian
    y = np.array(y_init, dtype=float)
    scale = float(np.linalg.norm(y))
    trace = SolveTrace(method="gauss-newton")
    res = sys(y, x)
    trace.record(y, np.linalg.norm(res))
    for _ in range(max_iter):
        if trace.residual_norms[-1] <= LEVELSET_TOL:
            return y, trace.finish(True, scale)
        try:
            w = least_norm_solve(sys.jacobian_y(y, x), -res)
        except RankDeficient as exc:
            raise NoConvergence(f"Gauss-Newton reached a singular Jacobian: {exc}",
                                trace.finish(False, scale)) from exc
        y = y + w
        res = sys(y, x)
        trace.record(y, np.linalg.norm(res), np.linalg.norm(w))
        if not np.all(np.isfinite(y)):
            break
    if trace.residual_norms[-1] <= LEVELSET_TOL:
        return y, trace.finish(True, scale)
    raise NoConvergence("Gauss-Newton projection failed", trace.finish(False, scale))


def project_to_root(sys: ParameterizedSystem, x, y_init, max_iter: int = MAX_ITER):
    """A root of ``F(., x)`` near ``y_init``.

    Tries the frozen-Jacobian iteration first and falls back to Gauss-Newton
    steps with the current Jacobian if it does not converge.
    """
    try:
        return frozen_levelset_solve(sys, x, np.zeros(sys.p), y_init, max_iter=max_iter)
    except NoConvergence:
        return _gauss_newton_root(sys, x, y_init, max_iter)


def _sqp(sys, x, y0, y_start, max_iter):
    y = np.array(y_start, dtype=float)
    scale = float(np.linalg.norm(y0))
    trace = SolveTrace(method="sqp")
    trace.record(y, np.linalg.norm(sys(y, x)))
    for _ in range(max_iter):
        fk = sys(y, x)
        kk = sys.jacobian_y(y, x)
        # min ||y' - y0|| subject to F(y) + K (y' - y) = 0
        try:
            d = least_norm_solve(kk, kk @ (y - y0) - fk)
        except RankDeficient as exc:
            raise NoConvergence(f"SQP iterate reached a singular Jacobian: {exc}",
                                trace.finish(False, scale)) from exc
        y_new = y0 + d
        step = float(np.linalg.norm(y_new - y))
        converged_step = step <= STEP_TOL * (1.0 + np.linalg.norm(y))
        y = y_new
        res = float(np.linalg.norm(sys(y, x)))
        trace.record(y, res, step)
        if not np.all(np.isfinite(y)):
            break
        if converged_step and res <= RESIDUAL_TOL:
            return y, trace.finish(True, scale)
    raise NoConvergence(f"SQP iteration did not converge in {max_iter} iterations",
                        trace.finish(False, scale))


def mu_f(prob: AnchoredProblem, x, max_iter: int = MAX_ITER, verify: bool = True,
         check_uniqueness: bool = False) -> MuFSolution:
    """Minimal perturbation ``min ||y - y0||_2`` over roots of ``F(., x)``.

    Each iteration solves the linearized problem at the current iterate in
    closed form and jumps to its solution, starting from ``y0``.  Fixed
    points satisfy the first-order optimality conditions.  The value is the
    local one in the neighborhood of ``y0`` reached by this iteration.

    With ``verify`` the result is checked against one feasible point from
    :func:`project_to_root` and against the optimality condition
    ``y* - y0 in range(d_y F(y*, x)^T)`` (tolerance 1e-8); a failure raises
    NoConvergence.  With ``check_uniqueness`` a second solve from a
    slightly jittered start sets ``trace.nonunique`` when the two values
    differ by more than 1e-9.
    """
    sys = prob.system
    x = prob.point(x)
    y0 = prob.y0
    if prob.at_anchor(x):
        trace = SolveTrace(method="sqp")
        trace.record(y0, 0.0)
        trace.kkt_residual = 0.0
        return MuFSolution(0.0, y0.copy(), trace.finish(True, 0.0))

    y_star, trace = _sqp(sys, x, y0, y0, max_iter)
    d = y_star - y0
    value = float(np.linalg.norm(d))

    if verify:
        k_star = sys.jacobian_y(y_star, x)
        trace.kkt_residual = float(np.linalg.norm(d - least_norm_solve(k_star, k_star @ d)))
        if trace.kkt_residual > 1e-8:
            raise NoConvergence(f"optimality residual {trace.kkt_residual:.2e} exceeds 1e-8", trace)
        y_feas, _ = project_to_root(sys, x, y0, max_iter)
        if value > np.linalg.norm(y_feas - y0) + 1e-10:
            raise NoConvergence("SQP point is farther than a known root; a non-minimal branch was reached",
                                trace)

    if check_uniqueness:
        jitter = np.random.default_rng(0).standard_normal(sys.m)
        jitter *= 1e-7 * (1.0 + np.linalg.norm(y0)) / np.linalg.norm(jitter)
        values = []
        for sign in (1.0, -1.0):
            try:
                y_alt, _ = _sqp(sys, x, y0, y0 + sign * jitter, max_iter)
                values.append(float(np.linalg.norm(y_alt - y0)))
            except NoConvergence:
                pass
        trace.nonunique = any(abs(v - value) > 1e-9 for v in values)

    return MuFSolution(value, y_star, trace)


def brute_force_mu_f(sys: ParameterizedSystem, anchor: Anchor, x, radius: float = 0.5,
                     grid_points: int = 201) -> float:
    """Grid-search estimate of the minimal perturbation, for m <= 3.

    The box ``y0 + [-radius, radius]^m`` is sampled on a regular grid.  For a
    single equation, every grid edge along which F changes sign is refined
    by bisection to a point on the zero set, and the smallest distance to
    ``y0`` among those points is returned; the error is far below the grid
    spacing.  For p > 1 a grid point counts as feasible when every
    component of F is below the first-order bound ``|grad F_i| * h * sqrt(m) / 2``
    (from neighboring grid values), and the result is accurate to about h.
    In both cases the nearest root may fall between grid lines, so even the
    single-equation result can overshoot by a small multiple of ``h**2``.

    Raises
    ------
    NoFeasiblePoint
        When no part of the zero set is found in the box.
    """
    y0 = anchor.y0
    x = np.asarray(x, dtype=float)
    m = sys.m
    if m > 3:
        raise ValueError("brute force search supports m <= 3")
    if not 2 <= grid_points <= 201:
        raise ValueError("grid_points must be between 2 and 201")
    axes = [np.linspace(c - radius, c + radius, grid_points) for c in y0]
    h = 2.0 * radius / (grid_points - 1)

    best = np.inf
    prev_pts = prev_vals = None
    mesh = np.meshgrid(*axes[1:], indexing="ij")
    for a0 in axes[0]:
        # one slab of the grid at fixed first coordinate
        pts = np.empty((grid_points,) * (m - 1) + (m,))
        pts[..., 0] = a0
        for j, g in enumerate(mesh, start=1):
            pts[..., j] = g
        vals = sys(pts, x)
        if sys.p == 1:
            f = vals[..., 0]
            edges = []
            for ax in range(m - 1):
                lo = [slice(None)] * (m - 1)
                hi = [slice(None)] * (m - 1)
                lo[ax] = slice(None, -1)
                hi[ax] = slice(1, None)
                edges.append((pts[tuple(lo)], pts[tuple(hi)], f[tuple(lo)], f[tuple(hi)]))
            if prev_pts is not None:
                edges.append((prev_pts, pts, prev_vals[..., 0], f))
            for pa, pb, fa, fb in edges:
                mask = (fa * fb < 0.0) | (fa == 0.0)
                if np.any(mask):
                    best = min(best, _bisect_edges(sys, x, pa[mask], pb[mask], fa[mask], y0))
            zero = f == 0.0
            if np.any(zero):
                best = min(best, float(np.min(np.linalg.norm(pts[zero] - y0, axis=-1))))
        else:
            grads = [np.gradient(vals, h, axis=ax) for ax in range(m - 1)] if m > 1 else []
            if prev_vals is not None:
                grads.append((vals - prev_vals) / h)
            slope = np.sqrt(sum(g ** 2 for g in grads)) if grads else np.zeros_like(vals)
            thresh = slope * h * np.sqrt(m) / 2.0 + 1e-14
            ok = np.all(np.abs(vals) <= thresh, axis=-1)
            if np.any(ok):
                best = min(best, float(np.min(np.linalg.norm(np.atleast_2d(pts[ok]) - y0, axis=-1))))
        prev_pts, prev_vals = pts, vals

    if not np.isfinite(best):
        raise NoFeasiblePoint("no root found in the search box; enlarge the radius or refine the grid")
    return float(best)


def _bisect_edges(sys, x, pa, pb, fa, y0, iterations: int = 60) -> float:
    pa = np.atleast_2d(pa).astype(float)
    pb = np.atleast_2d(pb).astype(float)
    fa = np.atleast_1d(fa).astype(float)
    for _ in range(iterations):
        mid = 0.5 * (pa + pb)
        fm = sys(mid, x)[..., 0]
        left = np.sign(fm) == np.sign(fa)
        pa = np.where(left[:, None], mid, pa)
        fa = np.where(left, fm, fa)
        pb = np.where(left[:, None], pb, mid)
    roots = 0.5 * (pa + pb)
    return float(np.min(np.linalg.norm(roots - y0, axis=-1)))
