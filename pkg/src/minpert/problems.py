"""Linearized minimal-perturbation problems and their duals (2-norm).

For an anchored system with ``K(x) = d_y F(y0, x)``, ``J(x) = d_x F(y0, x)``
and residual ``r(x) = F(y0, x)``:

=====  =====================================  ==================================
value  minimize ||dy|| subject to             dual: maximize over ||K^T u|| <= 1
=====  =====================================  ==================================
mu1    K(x)  dy = -r(x)                        u . r(x)
mu2    K(x0) dy = -r(x)                        u . r(x)
mu3    K(x0) dy = -J(x0) (x - x0)              u . J(x0) (x - x0)
=====  =====================================  ==================================

Primal values come from :func:`~minpert.linalg.least_norm_solve`; dual
values from :func:`~minpert.linalg.dual_max_2norm`.  The two agree to
rounding error, which :func:`duality_gap` measures.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, HypothesisFailure
from .linalg import (
    QrFactors,
    VectorNormKind,
    dual_certificate,
    dual_max_2norm,
    householder_qr,
    least_norm_solve,
)
from .system import Anchor, HypothesisReport, ParameterizedSystem, check_hypotheses


class LinearizedMu(NamedTuple):
    value: float
    dy: np.ndarray
    dual_value: float
    certificate: np.ndarray | None


class AnchoredProblem:
    """A parameterized system together with a validated anchor root.

    Construction checks that the anchor is a root and that ``K(x0)`` has
    full row rank, and caches ``K(x0)``, ``J(x0)`` and the QR factors of
    ``K(x0)^T``.  Instances are treated as immutable.

    Raises
    ------
    HypothesisFailure
        If the anchor residual exceeds the anchor tolerance or ``K(x0)`` is
        not onto.  The exception carries the :class:`HypothesisReport`.
    """

    norm = VectorNormKind.TWO

    def __init__(self, system: ParameterizedSystem, anchor: Anchor):
        if anchor.y0.size != system.m or anchor.x0.size != system.n:
            raise DimensionMismatch("anchor does not match the system dimensions")
        self.system = system
        self.anchor = anchor
        self.report: HypothesisReport = check_hypotheses(system, anchor)
        if not self.report.is_root:
            raise HypothesisFailure(
                f"anchor is not a root: ||F(y0, x0)|| = {self.report.residual_norm:.3e}", self.report
            )
        if not self.report.h5_onto:
            raise HypothesisFailure(
                f"d_y F(y0, x0) is not onto (rank {self.report.rank_K0} < p = {system.p})", self.report
            )
        self.k0 = system.jacobian_y(anchor.y0, anchor.x0)
        self.j0 = system.jacobian_x(anchor.y0, anchor.x0)
        self.k0t_qr: QrFactors = householder_qr(self.k0.T)

    @property
    def y0(self) -> np.ndarray:
        return self.anchor.y0

    @property
    def x0(self) -> np.ndarray:
        return self.anchor.x0

    def point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.system.n:
            raise DimensionMismatch(f"x must have {self.system.n} entries, got {x.size}")
        if not np.all(np.isfinite(x)):
            raise ValueError("x must be finite")
        return x

    def at_anchor(self, x) -> bool:
        return bool(np.all(self.point(x) == self.x0))

    def k(self, x) -> np.ndarray:
        return self.system.jacobian_y(self.y0, self.point(x))

    def __repr__(self) -> str:
        return f"AnchoredProblem({self.system.name!r}, m={self.system.m}, n={self.system.n}, p={self.system.p})"


@dataclass
class MuEstimates:
    """mu_F and its three linearized estimates at one parameter value."""

    x: np.ndarray
    mu_f: float | None
    mu1: float
    mu2: float
    mu3: float
    minimizers: dict = field(default_factory=dict)
    dual_values: dict = field(default_factory=dict)
    certificates: dict = field(default_factory=dict)


def residual(prob: AnchoredProblem, x) -> np.ndarray:
    return prob.system(prob.y0, prob.point(x))


def _zero(prob: AnchoredProblem) -> LinearizedMu:
    return LinearizedMu(0.0, np.zeros(prob.system.m), 0.0, None)


def _solve(k, s, factors) -> LinearizedMu:
    # minimize ||dy|| subject to k dy = -s; dual maximizes u.s
    dy = least_norm_solve(k, -s, factors)
    return LinearizedMu(
        float(np.linalg.norm(dy)),
        dy,
        dual_max_2norm(k, s, factors),
        dual_certificate(k, s, factors),
    )


def mu1(prob: AnchoredProblem, x) -> LinearizedMu:
    """Linearization in y at ``(y0, x)``; K(x) is re-factored on every call.

    Raises RankDeficient when K(x) has lost full row rank, which means x is
    outside the neighborhood where the problem is well posed.
    """
    x = prob.point(x)
    if prob.at_anchor(x):
        return _zero(prob)
    k = prob.k(x)
    return _solve(k, residual(prob, x), householder_qr(k.T))


def mu2(prob: AnchoredProblem, x) -> LinearizedMu:
    """Like :func:`mu1` but with the y-Jacobian frozen at the anchor."""
    x = prob.point(x)
    if prob.at_anchor(x):
        return _zero(prob)
    return _solve(prob.k0, residual(prob, x), prob.k0t_qr)


def mu3(prob: AnchoredProblem, x) -> LinearizedMu:
    """Full linearization at the anchor: residual replaced by ``J(x0) (x - x0)``."""
    x = prob.point(x)
    if prob.at_anchor(x):
        return _zero(prob)
    return _solve(prob.k0, prob.j0 @ (x - prob.x0), prob.k0t_qr)


_SOLVERS = {1: mu1, 2: mu2, 3: mu3}


def duality_gap(prob: AnchoredProblem, x, which: int) -> float:
    """Relative gap ``|primal - dual| / (1 + primal)`` for problem 1, 2 or 3."""
    try:
        solver = _SOLVERS[which]
    except KeyError:
        raise ValueError(f"which must be 1, 2 or 3, got {which!r}") from None
    sol = solver(prob, x)
    return abs(sol.value - sol.dual_value) / (1.0 + sol.value)


def mu_estimates(prob: AnchoredProblem, x, include_mu_f: bool = True) -> MuEstimates:
    """Evaluate all four values at ``x``.

    ``mu_f`` is None when it was not requested.  Solver errors propagate.
    """
    from .nonlinear import mu_f as solve_mu_f

    x = prob.point(x)
    sols = {name: fn(prob, x) for name, fn in (("mu1", mu1), ("mu2", mu2), ("mu3", mu3))}
    est = MuEstimates(
        x=x,
        mu_f=None,
        mu1=sols["mu1"].value,
        mu2=sols["mu2"].value,
        mu3=sols["mu3"].value,
        minimizers={k: s.dy for k, s in sols.items()},
        dual_values={k: s.dual_value for k, s in sols.items()},
        certificates={k: s.certificate for k, s in sols.items()},
    )
    if include_mu_f:
        exact = solve_mu_f(prob, x)
        est.mu_f = exact.value
        est.minimizers["mu_f"] = exact.y_star - prob.y0
    return est
