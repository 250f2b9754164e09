"""Parameterized polynomial systems ``F(y, x) = 0``.

A system maps ``y`` in R^m and a parameter ``x`` in R^n to R^p.  Each of
the p equations is a sum of monomials in the variables ``y1..ym`` and
``x1..xn``.  Since the representation is polynomial, both partial
Jacobians are evaluated exactly by term-wise differentiation.

Problem files look like::

    dims m=2 n=1 p=1
    anchor y0=(1,0) x0=(1)
    eq: y1^2 + y2^2 - x1
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch, ParseError
from .linalg import numerical_rank

DEGREE_CAP = 6
ANCHOR_TOL = 1e-12
HYPOTHESIS_RANK_TOL = 1e-10


@dataclass(frozen=True)
class PolyTerm:
    coefficient: float
    y_exponents: tuple[int, ...]
    x_exponents: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coefficient", float(self.coefficient))
        object.__setattr__(self, "y_exponents", tuple(int(e) for e in self.y_exponents))
        object.__setattr__(self, "x_exponents", tuple(int(e) for e in self.x_exponents))
        if any(e < 0 for e in self.y_exponents + self.x_exponents):
            raise ValueError("exponents must be nonnegative")

    @property
    def degree(self) -> int:
        return sum(self.y_exponents) + sum(self.x_exponents)

    @property
    def exponents(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return self.y_exponents, self.x_exponents


@dataclass(frozen=True, eq=False)
class Anchor:
    """The reference root ``(y0, x0)``."""

    y0: np.ndarray
    x0: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "y0", np.array(self.y0, dtype=float).ravel())
        object.__setattr__(self, "x0", np.array(self.x0, dtype=float).ravel())


@dataclass(frozen=True)
class HypothesisReport:
    residual_norm: float
    rank_K0: int
    rank_J0: int
    h5_onto: bool
    h6_one_to_one: bool
    anchor_tol: float = ANCHOR_TOL

    @property
    def is_root(self) -> bool:
        return self.residual_norm <= self.anchor_tol

    @property
    def usable(self) -> bool:
        """True when the anchor is a root and the y-Jacobian is onto."""
        return self.is_root and self.h5_onto

    def summary(self) -> str:
        return (
            f"residual_norm={self.residual_norm:.3e} (tol {self.anchor_tol:g}) "
            f"rank_K0={self.rank_K0} rank_J0={self.rank_J0} "
            f"h5_onto={self.h5_onto} h6_one_to_one={self.h6_one_to_one}"
        )


@dataclass(frozen=True)
class ParameterizedSystem:
    m: int
    n: int
    p: int
    equations: tuple[tuple[PolyTerm, ...], ...]
    name: str = "system"
    degree_cap: int = field(default=DEGREE_CAP, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "equations", tuple(tuple(eq) for eq in self.equations))
        if self.m < 1 or self.n < 1:
            raise DimensionMismatch(f"need m >= 1 and n >= 1, got m={self.m}, n={self.n}")
        if self.p < 1 or len(self.equations) != self.p:
            raise DimensionMismatch(f"p={self.p} but {len(self.equations)} equations given")
        for i, eq in enumerate(self.equations):
            for term in eq:
                if len(term.y_exponents) != self.m or len(term.x_exponents) != self.n:
                    raise DimensionMismatch(
                        f"equation {i + 1}: term exponents sized ({len(term.y_exponents)}, "
                        f"{len(term.x_exponents)}), system is (m={self.m}, n={self.n})"
                    )
                if term.degree > self.degree_cap:
                    raise ValueError(
                        f"equation {i + 1}: total degree {term.degree} exceeds cap {self.degree_cap}"
                    )

    # -- compiled arrays ---------------------------------------------------

    @cached_property
    def _arrays(self):
        terms = [t for eq in self.equations for t in eq]
        owner = np.array([i for i, eq in enumerate(self.equations) for _ in eq], dtype=int)
        coef = np.array([t.coefficient for t in terms], dtype=float)
        ey = np.array([t.y_exponents for t in terms], dtype=float).reshape(len(terms), self.m)
        ex = np.array([t.x_exponents for t in terms], dtype=float).reshape(len(terms), self.n)
        select = np.zeros((len(terms), self.p))
        select[np.arange(len(terms)), owner] = 1.0
        return coef, ey, ex, select

    def _monomials(self, y, x, ey, ex):
        return np.prod(y[..., None, :] ** ey, axis=-1) * np.prod(x[..., None, :] ** ex, axis=-1)

    def _check_point(self, y, x):
        y = np.asarray(y, dtype=float)
        x = np.asarray(x, dtype=float)
        if y.shape[-1:] != (self.m,) or x.shape[-1:] != (self.n,):
            raise DimensionMismatch(
                f"expected y in R^{self.m} and x in R^{self.n}, got shapes {y.shape} and {x.shape}"
            )
        return y, x

    def __call__(self, y, x) -> np.ndarray:
        """Evaluate F.  ``y`` and ``x`` may carry broadcastable leading axes."""
        y, x = self._check_point(y, x)
        coef, ey, ex, select = self._arrays
        return (self._monomials(y, x, ey, ex) * coef) @ select

    def _partial(self, y, x, wrt: str) -> np.ndarray:
        y, x = self._check_point(y, x)
        coef, ey, ex, select = self._arrays
        exps = ey if wrt == "y" else ex
        out = np.zeros(np.broadcast_shapes(y.shape[:-1], x.shape[:-1]) + (self.p, exps.shape[1]))
        for i in range(exps.shape[1]):
            power = exps[:, i]
            shifted = exps.copy()
            shifted[:, i] = np.maximum(power - 1.0, 0.0)
            if wrt == "y":
                mono = self._monomials(y, x, shifted, ex)
            else:
                mono = self._monomials(y, x, ey, shifted)
            out[..., :, i] = (mono * (coef * power)) @ select
        return out

    def jacobian_y(self, y, x) -> np.ndarray:
        """Exact p-by-m partial Jacobian with respect to y."""
        return self._partial(y, x, "y")

    def jacobian_x(self, y, x) -> np.ndarray:
        """Exact p-by-n partial Jacobian with respect to x."""
        return self._partial(y, x, "x")

    # -- transformations ---------------------------------------------------

    def canonical(self) -> "ParameterizedSystem":
        """Merge like monomials, drop zero coefficients, sort terms."""
        equations = []
        for eq in self.equations:
            merged: dict = defaultdict(float)
            for term in eq:
                merged[term.exponents] += term.coefficient
            items = sorted(
                ((k, c) for k, c in merged.items() if c != 0.0),
                key=lambda kc: (-sum(kc[0][0]) - sum(kc[0][1]), tuple(-e for e in kc[0][0] + kc[0][1])),
            )
            equations.append(tuple(PolyTerm(c, ky, kx) for (ky, kx), c in items))
        return ParameterizedSystem(self.m, self.n, self.p, tuple(equations), self.name, self.degree_cap)

    def canonical_equal(self, other: "ParameterizedSystem") -> bool:
        a, b = self.canonical(), other.canonical()
        return (a.m, a.n, a.p, a.equations) == (b.m, b.n, b.p, b.equations)

    def scaled(self, factor: float) -> "ParameterizedSystem":
        eqs = tuple(
            tuple(PolyTerm(factor * t.coefficient, t.y_exponents, t.x_exponents) for t in eq)
            for eq in self.equations
        )
        return ParameterizedSystem(self.m, self.n, self.p, eqs, f"{self.name}*{factor:g}", self.degree_cap)

    def with_parameters(self, n: int) -> "ParameterizedSystem":
        """Same equations over a larger parameter space; new parameters are unused."""
        if n < self.n:
            raise DimensionMismatch("can only add parameters")
        pad = (0,) * (n - self.n)
        eqs = tuple(
            tuple(PolyTerm(t.coefficient, t.y_exponents, t.x_exponents + pad) for t in eq)
            for eq in self.equations
        )
        return ParameterizedSystem(self.m, n, self.p, eqs, self.name, self.degree_cap)


def eval_f(sys: ParameterizedSystem, y, x) -> np.ndarray:
    return sys(y, x)


def jacobian_y(sys: ParameterizedSystem, y, x) -> np.ndarray:
    return sys.jacobian_y(y, x)


def jacobian_x(sys: ParameterizedSystem, y, x) -> np.ndarray:
    return sys.jacobian_x(y, x)


def check_hypotheses(sys: ParameterizedSystem, anchor: Anchor, rank_tol: float = HYPOTHESIS_RANK_TOL,
                     anchor_tol: float = ANCHOR_TOL) -> HypothesisReport:
    """Check the root condition and the rank conditions at the anchor.

    Failures are reported, never raised; callers decide what to reject.
    """
    y0, x0 = sys._check_point(anchor.y0, anchor.x0)
    residual = float(np.linalg.norm(sys(y0, x0)))
    rank_k = numerical_rank(sys.jacobian_y(y0, x0), rank_tol)
    rank_j = numerical_rank(sys.jacobian_x(y0, x0), rank_tol)
    return HypothesisReport(
        residual_norm=residual,
        rank_K0=rank_k,
        rank_J0=rank_j,
        h5_onto=rank_k == sys.p,
        h6_one_to_one=rank_j == sys.n,
        anchor_tol=anchor_tol,
    )


# -- text format -------------------------------------------------------------

_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_INT = re.compile(r"\d+")


class _TermScanner:
    """Recursive-descent reader for one equation body."""

    def __init__(self, text: str, line: int, offset: int):
        self.text = text
        self.pos = 0
        self.line = line
        self.offset = offset  # column of text[0], 1-based

    def error(self, message: str, pos: int | None = None):
        col = self.offset + (self.pos if pos is None else pos)
        return ParseError(message, self.line, col)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def integer(self, what: str, anchor: int) -> int:
        self.skip()
        match = _INT.match(self.text, self.pos)
        if not match:
            raise self.error(f"expected {what}", anchor)
        self.pos = match.end()
        return int(match.group())

    def terms(self):
        """Yield (coefficient, {('y'|'x', index): power}, start_pos) triples."""
        sign = 1.0
        first = True
        while True:
            ch = self.peek()
            if ch in "+-":
                sign = -1.0 if ch == "-" else 1.0
                self.pos += 1
            elif not first:
                if ch == "":
                    return
                raise self.error(f"expected '+' or '-' before {ch!r}")
            start = self.pos
            coef, powers = self.term()
            yield sign * coef, powers, start
            first = False
            sign = 1.0
            if self.peek() == "":
                return

    def term(self):
        self.skip()
        coef = 1.0
        powers: dict = defaultdict(int)
        match = _NUMBER.match(self.text, self.pos)
        if match:
            coef = float(match.group())
            self.pos = match.end()
        seen = match is not None
        while True:
            ch = self.peek()
            if ch == "*":
                self.pos += 1
                ch = self.peek()
                if ch not in ("y", "x"):
                    raise self.error("expected a variable after '*'")
            if ch not in ("y", "x"):
                break
            var_pos = self.pos
            self.pos += 1
            index = self.integer(f"an index after '{ch}'", self.pos)
            if index < 1:
                raise self.error("variable indices are 1-based", var_pos)
            power = 1
            if self.peek() == "^":
                caret = self.pos
                self.pos += 1
                power = self.integer("an integer exponent after '^'", caret)
            powers[(ch, index)] += power
            seen = True
        if not seen:
            found = self.peek() or "end of line"
            raise self.error(f"expected a coefficient or variable, found {found!r}")
        return coef, powers


def _parse_vector(text: str, line: int, col: int) -> np.ndarray:
    body = text.strip()
    if not (body.startswith("(") and body.endswith(")")):
        raise ParseError("vectors are written as (v1,v2,...)", line, col)
    try:
        return np.array([float(v) for v in body[1:-1].split(",")], dtype=float)
    except ValueError:
        raise ParseError(f"bad vector {body!r}", line, col) from None


def parse_problem(text: str, m: int | None = None, n: int | None = None,
                  name: str = "problem", degree_cap: int = DEGREE_CAP):
    """Parse problem text into ``(ParameterizedSystem, Anchor | None)``.

    ``dims`` and ``anchor`` lines are optional.  Without a ``dims`` line the
    dimensions come from the keyword arguments, or failing that from the
    largest variable index used.
    """
    dims: dict[str, int] = {}
    anchor_vectors: dict[str, np.ndarray] = {}
    raw_equations = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        indent = len(raw) - len(raw.lstrip())
        if stripped.startswith("eq:") or stripped.startswith("eq :"):
            colon = raw.index(":")
            body = raw[colon + 1:]
            scanner = _TermScanner(body, lineno, colon + 2)
            raw_equations.append((lineno, list(scanner.terms()), scanner))
        elif stripped.startswith("dims"):
            for match in re.finditer(r"(\S+)", stripped[4:]):
                token = match.group(1)
                key, _, value = token.partition("=")
                if key not in ("m", "n", "p") or not value.isdigit():
                    raise ParseError(f"bad dims entry {token!r}", lineno, indent + 5 + match.start() + 1)
                dims[key] = int(value)
        elif stripped.startswith("anchor"):
            for match in re.finditer(r"(y0|x0)\s*=\s*(\([^)]*\))", stripped):
                anchor_vectors[match.group(1)] = _parse_vector(
                    match.group(2), lineno, indent + match.start(2) + 1
                )
            if set(anchor_vectors) != {"y0", "x0"}:
                raise ParseError("anchor line needs y0=(...) and x0=(...)", lineno, indent + 1)
        elif stripped.startswith("name"):
            name = stripped.partition(":")[2].strip() or stripped.partition("=")[2].strip() or name
        else:
            raise ParseError(f"unrecognized line {stripped!r}", lineno, indent + 1)

    if not raw_equations:
        raise ParseError("no 'eq:' lines found", 1, 1)

    max_y = max((idx for _, terms, _ in raw_equations for _, pw, _ in terms
                 for (v, idx) in pw if v == "y"), default=0)
    max_x = max((idx for _, terms, _ in raw_equations for _, pw, _ in terms
                 for (v, idx) in pw if v == "x"), default=0)
    m = dims.get("m", m if m is not None else max_y)
    n = dims.get("n", n if n is not None else max_x)
    if m < 1 or n < 1:
        raise DimensionMismatch("could not determine m and n; add a 'dims' line")
    if max_y > m or max_x > n:
        raise DimensionMismatch(f"variable index exceeds dims (m={m}, n={n})")
    if "p" in dims and dims["p"] != len(raw_equations):
        raise DimensionMismatch(f"dims says p={dims['p']} but {len(raw_equations)} equations given")

    equations = []
    for lineno, terms, scanner in raw_equations:
        eq = []
        for coef, powers, start in terms:
            ey = [0] * m
            ex = [0] * n
            for (v, idx), pw in powers.items():
                (ey if v == "y" else ex)[idx - 1] += pw
            if sum(ey) + sum(ex) > degree_cap:
                raise scanner.error(f"total degree {sum(ey) + sum(ex)} exceeds cap {degree_cap}", start)
            eq.append(PolyTerm(coef, ey, ex))
        equations.append(tuple(eq))

    system = ParameterizedSystem(m, n, len(equations), tuple(equations), name, degree_cap)
    anchor = None
    if anchor_vectors:
        anchor = Anchor(anchor_vectors["y0"], anchor_vectors["x0"])
        if anchor.y0.size != m or anchor.x0.size != n:
            raise DimensionMismatch(f"anchor sizes ({anchor.y0.size}, {anchor.x0.size}) do not match (m={m}, n={n})")
    return system, anchor


def parse_system(text: str, m: int | None = None, n: int | None = None, **kwargs) -> ParameterizedSystem:
    return parse_problem(text, m=m, n=n, **kwargs)[0]


def _format_number(value: float) -> str:
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _format_term(term: PolyTerm) -> str:
    factors = []
    for prefix, exps in (("y", term.y_exponents), ("x", term.x_exponents)):
        for i, e in enumerate(exps, start=1):
            if e == 1:
                factors.append(f"{prefix}{i}")
            elif e > 1:
                factors.append(f"{prefix}{i}^{e}")
    mag = abs(term.coefficient)
    if not factors:
        return _format_number(mag)
    if mag == 1.0:
        return " ".join(factors)
    return " ".join([_format_number(mag)] + factors)


def serialize_equation(eq) -> str:
    if not eq:
        return "0"
    parts = []
    for k, term in enumerate(eq):
        sign = "-" if term.coefficient < 0 else "+"
        body = _format_term(term)
        if k == 0:
            parts.append(("-" if sign == "-" else "") + body)
        else:
            parts.append(f"{sign} {body}")
    return " ".join(parts)


def _format_vector(v) -> str:
    return "(" + ",".join(_format_number(float(c)) for c in v) + ")"


def serialize_system(sys: ParameterizedSystem, anchor: Anchor | None = None) -> str:
    lines = [f"dims m={sys.m} n={sys.n} p={sys.p}"]
    if anchor is not None:
        lines.append(f"anchor y0={_format_vector(anchor.y0)} x0={_format_vector(anchor.x0)}")
    lines.extend(f"eq: {serialize_equation(eq)}" for eq in sys.equations)
    return "\n".join(lines) + "\n"


def random_system(rng: np.random.Generator, m: int, n: int, p: int, degree: int = 2,
                  terms_per_equation: int = 6, name: str = "random"):
    """A random polynomial system together with an anchor that is a root.

    Each equation gets random monomials of total degree at most ``degree``,
    plus a linear part in y and x so that the Jacobians at the anchor are
    generically of full rank.  The constant term is chosen to make the
    anchor a root.
    """
    y0 = rng.uniform(-1.0, 1.0, m)
    x0 = rng.uniform(-1.0, 1.0, n)
    equations = []
    for _ in range(p):
        eq = []
        for j in range(m):
            eq.append(PolyTerm(rng.standard_normal(), tuple(int(k == j) for k in range(m)), (0,) * n))
        for j in range(n):
            eq.append(PolyTerm(rng.standard_normal(), (0,) * m, tuple(int(k == j) for k in range(n))))
        for _ in range(terms_per_equation):
            total = int(rng.integers(2, degree + 1)) if degree >= 2 else 1
            exps = np.zeros(m + n, dtype=int)
            for _ in range(total):
                exps[rng.integers(m + n)] += 1
            eq.append(PolyTerm(rng.standard_normal(), tuple(exps[:m]), tuple(exps[m:])))
        equations.append(eq)
    draft = ParameterizedSystem(m, n, p, tuple(tuple(eq) for eq in equations), name)
    offset = draft(y0, x0)
    for eq, c in zip(equations, offset):
        eq.append(PolyTerm(-c, (0,) * m, (0,) * n))
    system = ParameterizedSystem(m, n, p, tuple(tuple(eq) for eq in equations), name)
    return system, Anchor(y0, x0)
