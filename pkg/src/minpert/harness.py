"""Sweeps along rays ``x = x0 + t d`` and verdicts on the resulting tables.

A sweep evaluates mu_F, mu1, mu2, mu3 and the duality gaps at a decreasing
sequence of t.  The checks group rows by decade of t and look at the
largest deviation in each decade:

* asymptotic equality of two values f, g: ``|f/g - 1|`` must shrink from
  decade to decade and end below ``eps_final``;
* differential equivalence of mu2 and mu3: the same for ``|mu3 - mu2| / t``;
* Lipschitz bound: ``mu_F / t`` stays bounded.

No convergence rate is assumed.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import InsufficientData, MinPertError
from .nonlinear import mu_f as solve_mu_f
from .problems import AnchoredProblem, mu1, mu2, mu3

EPS_FINAL = 1e-2
MONOTONE_SLACK = 1e-12
# absolute rounding level of computed mu values for unit-scale problems
MU_NOISE = 1e-14
MU_F_MIN_T = 1e-8
GAP_TOL = 1e-9

CSV_COLUMNS = ("t", "mu_f", "mu1", "mu2", "mu3", "r1", "r2", "r3",
               "gap1", "gap2", "gap3", "diff_quotient")


def geometric_t_values(start: float = 1e-1, stop: float = 1e-7, per_decade: int = 3) -> tuple[float, ...]:
    """``start * 10**(-j / per_decade)`` for all j with the value above ``stop``."""
    if not (start > stop > 0.0):
        raise ValueError("need start > stop > 0")
    if per_decade < 1:
        raise ValueError("per_decade must be at least 1")
    count = int(round(math.log10(start / stop) * per_decade))
    return tuple(start * 10.0 ** (-j / per_decade) for j in range(count))


@dataclass(frozen=True)
class SweepSpec:
    direction: tuple[float, ...]
    t_values: tuple[float, ...] = field(default_factory=geometric_t_values)
    include_mu_f: bool = True

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float).ravel()
        size = np.linalg.norm(d)
        if not np.isfinite(size) or size == 0.0:
            raise ValueError("direction must be a nonzero finite vector")
        object.__setattr__(self, "direction", tuple(float(v) for v in d / size))
        t = tuple(float(v) for v in self.t_values)
        if not t or any(v <= 0.0 for v in t) or any(b >= a for a, b in zip(t, t[1:])):
            raise ValueError("t_values must be positive and strictly decreasing")
        object.__setattr__(self, "t_values", t)


@dataclass
class SweepRow:
    t: float
    x: tuple[float, ...]
    mu_f: float | None = None
    mu1: float | None = None
    mu2: float | None = None
    mu3: float | None = None
    r1: float | None = None
    r2: float | None = None
    r3: float | None = None
    gap1: float | None = None
    gap2: float | None = None
    gap3: float | None = None
    diff_quotient: float | None = None
    error: str | None = None


@dataclass(frozen=True)
class Verdict:
    check_name: str
    passed: bool
    worst_value: float
    threshold: float
    regime: str = "asymptotic"
    monotone: bool = True
    applicable: bool = True
    note: str = ""

    @property
    def status(self) -> str:
        if not self.applicable:
            return "not-applicable"
        return "pass" if self.passed else "fail"

    def line(self) -> str:
        return (f"{self.check_name}: {self.status} worst={self.worst_value:.3e} "
                f"threshold={self.threshold:.3e} regime={self.regime}"
                + (f" ({self.note})" if self.note else ""))


def _row(prob: AnchoredProblem, t: float, direction: np.ndarray, include_mu_f: bool) -> SweepRow:
    x = prob.x0 + t * direction
    row = SweepRow(t=float(t), x=tuple(float(v) for v in x))
    errors = []
    for index, solver in ((1, mu1), (2, mu2), (3, mu3)):
        try:
            sol = solver(prob, x)
        except MinPertError as exc:
            errors.append(f"mu{index}: {type(exc).__name__}: {exc}")
            continue
        setattr(row, f"mu{index}", sol.value)
        setattr(row, f"gap{index}", abs(sol.value - sol.dual_value) / (1.0 + sol.value))
    if include_mu_f and t >= MU_F_MIN_T:
        try:
            row.mu_f = solve_mu_f(prob, x).value
        except MinPertError as exc:
            errors.append(f"mu_f: {type(exc).__name__}: {exc}")
    if row.mu_f:
        for index in (1, 2, 3):
            value = getattr(row, f"mu{index}")
            if value is not None:
                setattr(row, f"r{index}", value / row.mu_f)
    if row.mu2 is not None and row.mu3 is not None:
        row.diff_quotient = abs(row.mu3 - row.mu2) / t
    row.error = "; ".join(errors) or None
    return row


def run_sweep(prob: AnchoredProblem, spec: SweepSpec) -> list[SweepRow]:
    """One row per t; solver failures are recorded in ``row.error``."""
    direction = np.asarray(spec.direction, dtype=float)
    if direction.size != prob.system.n:
        raise ValueError(f"direction has {direction.size} entries, system has n={prob.system.n}")
    return [_row(prob, t, direction, spec.include_mu_f) for t in spec.t_values]


def decade_of(t: float) -> int:
    return math.floor(-math.log10(t) + 1e-9)


def decade_maxima(ts, values) -> list[tuple[int, float]]:
    """Largest value per decade of t, ordered from large t to small t."""
    out: dict[int, float] = {}
    for t, v in zip(ts, values):
        d = decade_of(t)
        out[d] = max(out.get(d, -math.inf), v)
    return sorted(out.items())


def _squeeze(ts, devs, floors, min_decades, slack):
    maxima = decade_maxima(ts, devs)
    if len(maxima) < min_decades:
        raise InsufficientData(f"need rows in at least {min_decades} decades of t, got {len(maxima)}")
    floor_by_decade = dict(decade_maxima(ts, floors))
    # a decade may exceed its predecessor only by slack plus its own rounding floor
    monotone = all(
        b <= a + slack + floor_by_decade[d]
        for (_, a), (d, b) in zip(maxima, maxima[1:])
    )
    final = maxima[-1][1]
    return final, monotone, maxima


def check_asymptotic_equality(rows, pair=("mu1", "mu_f"), eps_final: float = EPS_FINAL,
                              slack: float = MONOTONE_SLACK, min_decades: int = 3,
                              noise: float = MU_NOISE) -> Verdict:
    """Squeeze test for ``pair[0] / pair[1] -> 1`` as t decreases.

    Passes when the per-decade maximum of ``|ratio - 1|`` never increases
    and the last decade's maximum is at most ``eps_final``.  An increase is
    tolerated up to ``slack`` plus the rounding floor ``noise / min(f, g)``
    of the decade, so ratios that are exactly 1 in exact arithmetic pass.
    Only rows where both values are present and nonzero are used.
    """
    f_name, g_name = pair
    ts, devs, floors = [], [], []
    for row in rows:
        f, g = getattr(row, f_name), getattr(row, g_name)
        if f and g:
            ts.append(row.t)
            devs.append(abs(f / g - 1.0))
            floors.append(noise / min(abs(f), abs(g)))
    final, monotone, _ = _squeeze(ts, devs, floors, min_decades, slack)
    return Verdict(
        check_name=f"asymptotic[{f_name}~{g_name}]",
        passed=bool(final <= eps_final and monotone),
        worst_value=float(final),
        threshold=eps_final,
        regime="asymptotic",
        monotone=monotone,
        note="" if monotone else "decade maxima increased",
    )


def check_differential_equivalence(rows, one_to_one: bool = True, eps_final: float = EPS_FINAL,
                                   slack: float = MONOTONE_SLACK, min_decades: int = 3,
                                   noise: float = MU_NOISE) -> Verdict:
    """Test ``|mu3 - mu2| / t -> 0`` and classify the regime.

    The regime is ``asymptotic`` when the parameter Jacobian at the anchor
    is one-to-one and mu3/mu2 also passes the squeeze test, otherwise
    ``differential-only``.
    """
    pts = [(row.t, row.diff_quotient) for row in rows if row.diff_quotient is not None]
    ts = [t for t, _ in pts]
    final, monotone, _ = _squeeze(ts, [q for _, q in pts], [noise / t for t in ts], min_decades, slack)
    regime = "differential-only"
    if one_to_one:
        try:
            if check_asymptotic_equality(rows, ("mu3", "mu2"), eps_final, slack, min_decades, noise).passed:
                regime = "asymptotic"
        except InsufficientData:
            pass
    return Verdict(
        check_name="differential[mu3~mu2]",
        passed=bool(final <= eps_final and monotone),
        worst_value=float(final),
        threshold=eps_final,
        regime=regime,
        monotone=monotone,
        note="" if monotone else "decade maxima increased",
    )


def estimate_lipschitz(rows) -> float:
    """``max mu_F / t`` over rows where mu_F is present."""
    ratios = [row.mu_f / row.t for row in rows if row.mu_f is not None]
    if not ratios:
        raise InsufficientData("no row carries mu_f")
    value = max(ratios)
    if not math.isfinite(value):
        raise ArithmeticError("Lipschitz estimate is not finite")
    return float(value)


def check_lipschitz(rows) -> Verdict:
    """``mu_F / t`` must stay within twice its median over the sweep."""
    ratios = [row.mu_f / row.t for row in rows if row.mu_f is not None]
    if not ratios:
        raise InsufficientData("no row carries mu_f")
    bound = 2.0 * float(np.median(ratios))
    worst = estimate_lipschitz(rows)
    return Verdict("lipschitz", worst <= bound, worst, bound, note=f"L={worst:.6g}")


def check_duality(rows, tol: float = GAP_TOL) -> Verdict:
    gaps = [g for row in rows for g in (row.gap1, row.gap2, row.gap3) if g is not None]
    if not gaps:
        raise InsufficientData("no duality gaps recorded")
    worst = max(gaps)
    return Verdict("duality", worst <= tol, float(worst), tol)


def not_applicable(name: str, reason: str, regime: str = "asymptotic") -> Verdict:
    return Verdict(name, True, float("nan"), float("nan"), regime=regime, applicable=False, note=reason)


# -- reports -----------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    return format(float(value), ".17g")


def _json_value(value) -> str:
    if value is None or (isinstance(value, float) and not math.isfinite(value)):
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(v)}" for k, v in value.items()) + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json_value(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def emit_report(rows, verdicts=(), format: str = "csv", meta: dict | None = None) -> bytes:
    """Serialize rows and verdicts; numbers carry 17 significant digits.

    CSV has exactly the columns of ``CSV_COLUMNS``; ``meta`` and verdicts,
    when given, become ``#`` comment lines before and after the table.
    JSON is an object with ``meta``, ``rows`` (SweepRow fields) and
    ``verdicts``.  Output is deterministic for identical inputs.
    """
    if format == "csv":
        buf = io.StringIO()
        for key, value in (meta or {}).items():
            buf.write(f"# {key}={value}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(getattr(row, c)) for c in CSV_COLUMNS])
        for v in verdicts:
            buf.write(f"# verdict {v.line()}\n")
        return buf.getvalue().encode("utf-8")
    if format == "json":
        doc = {
            "meta": dict(meta or {}),
            "rows": [asdict(row) for row in rows],
            "verdicts": [dict(asdict(v), status=v.status) for v in verdicts],
        }
        return (_json_value(doc) + "\n").encode("utf-8")
    raise ValueError(f"unknown report format {format!r}")


def rows_from_json(data: bytes | str) -> list[SweepRow]:
    doc = json.loads(data)
    names = {f.name for f in fields(SweepRow)}
    return [SweepRow(**{k: (tuple(v) if k == "x" else v) for k, v in r.items() if k in names})
            for r in doc["rows"]]
