"""Dense real linear algebra used by the solvers.

Everything here is a pure function of its inputs.  Matrices are plain
``numpy.ndarray`` objects of dtype float64; the functions validate shape
and finiteness at the boundary and raise :class:`~minpert.errors.RankDeficient`
or :class:`~minpert.errors.ZeroMatrix` when a precondition fails.
"""

from __future__ import annotations

import enum
import itertools
from typing import NamedTuple

import numpy as np
from scipy.linalg import solve_triangular
from scipy.optimize import linprog

from .errors import DimensionMismatch, RankDeficient, ZeroMatrix

RANK_TOL = 1e-12


class VectorNormKind(str, enum.Enum):
    ONE = "one"
    TWO = "two"
    INFINITY = "infinity"

    @classmethod
    def coerce(cls, value) -> "VectorNormKind":
        if isinstance(value, cls):
            return value
        aliases = {"1": "one", "2": "two", "inf": "infinity", "max": "infinity"}
        key = str(value).strip().lower()
        return cls(aliases.get(key, key))

    @property
    def ord(self):
        return {"one": 1, "two": 2, "infinity": np.inf}[self.value]


class QrFactors(NamedTuple):
    q: np.ndarray
    r: np.ndarray


class Bracket(NamedTuple):
    lo: float
    hi: float

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __contains__(self, value) -> bool:
        return self.lo <= value <= self.hi


def as_matrix(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionMismatch(f"expected a non-empty 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def vector_norm(v, norm="two") -> float:
    return float(np.linalg.norm(np.asarray(v, dtype=float).ravel(), VectorNormKind.coerce(norm).ord))


def dual_of(norm) -> VectorNormKind:
    norm = VectorNormKind.coerce(norm)
    return {
        VectorNormKind.ONE: VectorNormKind.INFINITY,
        VectorNormKind.TWO: VectorNormKind.TWO,
        VectorNormKind.INFINITY: VectorNormKind.ONE,
    }[norm]


def householder_qr(a, rank_tol: float = RANK_TOL) -> QrFactors:
    """Thin QR factorization by Householder reflections.

    Parameters
    ----------
    a : array_like, shape (r, c) with r >= c
        Matrix of full column rank.
    rank_tol : float
        A diagonal entry of R with magnitude at most ``rank_tol`` times the
        largest diagonal magnitude marks the input as rank deficient.

    Returns
    -------
    QrFactors
        ``q`` of shape (r, c) with orthonormal columns and square upper
        triangular ``r`` with a nonnegative diagonal.
    """
    a = as_matrix(a)
    rows, cols = a.shape
    if rows < cols:
        raise DimensionMismatch(f"householder_qr needs rows >= cols, got {a.shape}")

    work = a.copy()
    reflectors = []
    for k in range(cols):
        x = work[k:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            reflectors.append(None)
            continue
        v = x.copy()
        v[0] += np.copysign(alpha, x[0])
        v /= np.linalg.norm(v)
        work[k:, k:] -= 2.0 * np.outer(v, v @ work[k:, k:])
        reflectors.append(v)

    r = np.triu(work[:cols, :])
    q = np.eye(rows, cols)
    for k in reversed(range(cols)):
        v = reflectors[k]
        if v is not None:
            q[k:, :] -= 2.0 * np.outer(v, v @ q[k:, :])

    signs = np.where(np.diag(r) < 0.0, -1.0, 1.0)
    q *= signs
    r *= signs[:, None]

    diag = np.abs(np.diag(r))
    if diag.max() == 0.0 or diag.min() <= rank_tol * diag.max():
        raise RankDeficient(
            f"matrix of shape {a.shape} is numerically rank deficient "
            f"(min |R_kk| = {diag.min():.3e}, max |R_kk| = {diag.max():.3e})"
        )
    return QrFactors(q, r)


def _transpose_qr(a, factors: QrFactors | None) -> QrFactors:
    return householder_qr(a.T) if factors is None else factors


def least_norm_solve(a, b, factors: QrFactors | None = None) -> np.ndarray:
    """Minimum 2-norm solution of the underdetermined system ``a @ z = b``.

    ``a`` is p-by-m with full row rank.  The solution is ``Q R^{-T} b`` for
    ``a.T = Q R``.  ``b`` may be a vector or a p-by-k block of right-hand
    sides.  Pass ``factors`` to reuse a QR factorization of ``a.T``.
    """
    a = as_matrix(a)
    b = np.asarray(b, dtype=float)
    if a.shape[0] > a.shape[1]:
        raise DimensionMismatch(f"least_norm_solve needs p <= m, got {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise DimensionMismatch(f"right-hand side has {b.shape[0]} rows, matrix has {a.shape[0]}")
    q, r = _transpose_qr(a, factors)
    return q @ solve_triangular(r, b, trans="T", lower=False)


def dual_max_2norm(k, s, factors: QrFactors | None = None) -> float:
    """Value of ``max u.s`` subject to ``||k.T u||_2 <= 1``.

    Equal to ``||R^{-T} s||_2`` where ``k.T = Q R``.
    """
    k = as_matrix(k)
    q, r = _transpose_qr(k, factors)
    return float(np.linalg.norm(solve_triangular(r, np.asarray(s, dtype=float), trans="T", lower=False)))


def dual_certificate(k, s, factors: QrFactors | None = None) -> np.ndarray | None:
    """The maximizing functional ``u = R^{-1} R^{-T} s / ||R^{-T} s||``.

    Returns None when ``s`` is zero, in which case every feasible ``u`` is
    optimal with value 0.
    """
    k = as_matrix(k)
    q, r = _transpose_qr(k, factors)
    w = solve_triangular(r, np.asarray(s, dtype=float), trans="T", lower=False)
    size = np.linalg.norm(w)
    if size == 0.0:
        return None
    return solve_triangular(r, w, lower=False) / size


def singular_values(a) -> np.ndarray:
    return np.linalg.svd(as_matrix(a), compute_uv=False)


def smallest_singular_value(a) -> float:
    return float(singular_values(a)[-1])


def numerical_rank(a, rtol: float) -> int:
    s = singular_values(a)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rtol * s[0]))


def _check_nonzero(a) -> np.ndarray:
    a = as_matrix(a)
    if not np.any(a):
        raise ZeroMatrix("the matrix lower bound is defined only for nonzero matrices")
    return a


def matrix_lower_bound(a, norm="two", **bracket_kwargs):
    """Matrix lower bound of a nonzero matrix.

    For the 2-norm this is the smallest nonzero singular value (for full row
    rank, simply the smallest singular value) and a float is returned.  For
    the 1- and infinity-norms there is no cheap exact formula here, so a
    :class:`Bracket` from :func:`lower_bound_bracket` is returned instead.
    """
    a = _check_nonzero(a)
    norm = VectorNormKind.coerce(norm)
    if norm is VectorNormKind.TWO:
        s = singular_values(a)
        return float(s[s > RANK_TOL * s[0]][-1])
    return lower_bound_bracket(a, norm, **bracket_kwargs)


def _min_norm_preimage_lp(a: np.ndarray, y: np.ndarray, norm: VectorNormKind) -> float:
    p, m = a.shape
    if norm is VectorNormKind.ONE:
        # x = u - v with u, v >= 0; minimize sum(u + v)
        res = linprog(
            np.ones(2 * m),
            A_eq=np.hstack([a, -a]),
            b_eq=y,
            bounds=[(0, None)] * (2 * m),
            method="highs",
        )
    else:
        # variables (x, s); minimize s with -s <= x_i <= s
        eye = np.eye(m)
        ones = np.ones((m, 1))
        res = linprog(
            np.r_[np.zeros(m), 1.0],
            A_ub=np.vstack([np.hstack([eye, -ones]), np.hstack([-eye, -ones])]),
            b_ub=np.zeros(2 * m),
            A_eq=np.hstack([a, np.zeros((p, 1))]),
            b_eq=y,
            bounds=[(None, None)] * m + [(0, None)],
            method="highs",
        )
    if res.status != 0:
        raise RuntimeError(f"linear program failed: {res.message}")
    return float(res.fun)


def _ball_vertices(p: int, norm: VectorNormKind, limit: int = 4096) -> np.ndarray:
    # Extreme points of the unit ball, one of each +/- pair.
    if norm is VectorNormKind.ONE:
        return np.eye(p)
    if 2 ** (p - 1) > limit:
        return np.empty((0, p))
    tails = np.array(list(itertools.product((1.0, -1.0), repeat=p - 1)), dtype=float)
    return np.hstack([np.ones((len(tails), 1)), tails.reshape(len(tails), p - 1)])


def lower_bound_bracket(a, norm="two", samples: int | None = None, seed: int = 0) -> Bracket:
    """Bracket the matrix lower bound straight from its definition.

    The upper end is the smallest ratio ``||y|| / min{||x|| : a x = y}`` over
    sampled ``y`` in the column space of ``a``; every sample is a witness that
    no larger bound can hold.  For 1- and infinity-norms with full row rank
    the vertices of the unit ball are added to the samples.  The lower end is
    ``1 / ||a^+||`` in the induced norm, valid because ``a^+ y`` is always one
    admissible preimage.

    Parameters
    ----------
    a : array_like
        Nonzero matrix.
    norm : VectorNormKind or str
    samples : int, optional
        Number of random directions; default 10000 for the 2-norm (where
        preimages are cheap) and 400 otherwise (one linear program each).
    seed : int
        Seed for the sampling generator.
    """
    a = _check_nonzero(a)
    norm = VectorNormKind.coerce(norm)
    p, m = a.shape
    if samples is None:
        samples = 10_000 if norm is VectorNormKind.TWO else 400
    rng = np.random.default_rng(seed)

    full_row_rank = p <= m and numerical_rank(a, RANK_TOL) == p
    if full_row_rank:
        ys = rng.standard_normal((samples, p))
    else:
        ys = rng.standard_normal((samples, m)) @ a.T
    if full_row_rank and norm is not VectorNormKind.TWO:
        ys = np.vstack([ys, _ball_vertices(p, norm)])
    ys = ys[np.linalg.norm(ys, axis=1) > 0.0]
    y_norms = np.linalg.norm(ys, norm.ord, axis=1)

    if full_row_rank:
        factors = householder_qr(a.T)
        pinv = factors.q @ solve_triangular(factors.r, np.eye(p), trans="T", lower=False)
    else:
        pinv = np.linalg.pinv(a, rcond=RANK_TOL)

    if norm is VectorNormKind.TWO:
        if full_row_rank:
            pre = least_norm_solve(a, ys.T, factors)
        else:
            pre = pinv @ ys.T
        pre_norms = np.linalg.norm(pre, axis=0)
    else:
        pre_norms = np.array([_min_norm_preimage_lp(a, y, norm) for y in ys])
    # both ends carry a rounding allowance; with p = 1 every sampled ratio
    # equals the bound exactly, and unpadded rounding can land on either side
    slack = 64 * np.finfo(float).eps
    hi = (1.0 + slack) * float(np.min(y_norms / pre_norms))
    lo = (1.0 - slack) / float(np.linalg.norm(pinv, norm.ord))
    return Bracket(float(min(lo, hi)), float(hi))
