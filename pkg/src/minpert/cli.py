"""Command-line entry point.

Subcommands::

    minpert solve --builtin circle --x 1.21
    minpert sweep --builtin circle --direction 1 --format csv --out circle.csv
    minpert lowerbound matrix.txt --norm infinity

Exit codes: 0 success, 1 a verdict failed, 2 bad input or failed
hypotheses, 3 numerical non-convergence, 64 usage error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatch,
    HypothesisFailure,
    InsufficientData,
    MinPertError,
    NoConvergence,
    ParseError,
    RankDeficient,
    UnknownBuiltin,
    ZeroMatrix,
)
from .harness import (
    SweepSpec,
    Verdict,
    check_asymptotic_equality,
    check_differential_equivalence,
    check_duality,
    check_lipschitz,
    emit_report,
    geometric_t_values,
    not_applicable,
    run_sweep,
)
from .linalg import Bracket, VectorNormKind, matrix_lower_bound
from .problems import AnchoredProblem, mu1, mu2, mu3
from .registry import builtin
from .system import parse_problem

EXIT_OK, EXIT_VERDICT, EXIT_INPUT, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2, 3, 64
CHECKS = ("duality", "asymptotic", "differential", "lipschitz")
ASYMPTOTIC_PAIRS = (("mu1", "mu_f"), ("mu2", "mu1"), ("mu2", "mu_f"), ("mu3", "mu2"))


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    problem_source: str
    direction: str = ""
    t_range: tuple[float, float, int] = (1e-1, 1e-7, 3)
    checks: tuple[str, ...] = CHECKS
    output: str | None = None
    format: str = "csv"
    include_mu_f: bool = True

    def __post_init__(self):
        start, stop, per_decade = self.t_range
        if not (start > stop > 0.0):
            raise UsageError(f"need t-start > t-stop > 0, got {start:g} and {stop:g}")
        if per_decade < 1:
            raise UsageError("per-decade must be at least 1")
        unknown = set(self.checks) - set(CHECKS)
        if unknown:
            raise UsageError(f"unknown checks: {', '.join(sorted(unknown))}")
        if self.format not in ("csv", "json"):
            raise UsageError(f"unknown format {self.format!r}")


def _floats(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")], dtype=float)
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from None


def load_problem(source: str, is_file: bool):
    if is_file:
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as exc:
            raise DimensionMismatch(f"cannot read problem file: {exc}") from None
        system, anchor = parse_problem(text, name=Path(source).stem)
        if anchor is None:
            raise ParseError("problem file has no 'anchor' line", 1, 1)
        return system, anchor
    return builtin(source)


def resolve_direction(spec: str, n: int) -> tuple[np.ndarray, str]:
    """Direction vector and a description of where it came from."""
    if not spec:
        d = np.zeros(n)
        d[0] = 1.0
        return d, "default:e1"
    if spec.startswith("random:"):
        try:
            seed = int(spec.partition(":")[2])
        except ValueError:
            raise UsageError(f"bad random direction seed in {spec!r}") from None
        return np.random.default_rng(seed).standard_normal(n), spec
    d = _floats(spec)
    if d.size != n:
        raise DimensionMismatch(f"direction has {d.size} entries, problem has n={n}")
    return d, "explicit"


def _fmt(value) -> str:
    return "absent" if value is None else format(value, ".15g")


def _make_problem(args):
    source = args.problem or args.builtin
    system, anchor = load_problem(source, is_file=bool(args.problem))
    return AnchoredProblem(system, anchor)


def cmd_solve(args) -> int:
    prob = _make_problem(args)
    if args.x is None:
        raise UsageError("--x is required")
    x = _floats(args.x)
    if x.size != prob.system.n:
        raise DimensionMismatch(f"--x has {x.size} entries, problem has n={prob.system.n}")
    from .nonlinear import mu_f

    print(f"problem {prob.system.name}: m={prob.system.m} n={prob.system.n} p={prob.system.p}")
    print(f"x = ({', '.join(format(v, '.15g') for v in x)})")
    exact = mu_f(prob, x)
    print(f"mu_f = {_fmt(exact.value)}")
    for index, solver in ((1, mu1), (2, mu2), (3, mu3)):
        sol = solver(prob, x)
        gap = abs(sol.value - sol.dual_value) / (1.0 + sol.value)
        print(f"mu{index} = {_fmt(sol.value)}  dual = {_fmt(sol.dual_value)}  gap = {gap:.3e}")
    return EXIT_OK


def sweep_verdicts(rows, prob: AnchoredProblem, checks, include_mu_f: bool) -> list[Verdict]:
    one_to_one = prob.report.h6_one_to_one
    verdicts = []

    def guarded(name, fn, *a, **kw):
        try:
            return fn(*a, **kw)
        except InsufficientData as exc:
            return Verdict(name, False, float("nan"), float("nan"), note=f"insufficient data: {exc}")

    if "duality" in checks:
        verdicts.append(guarded("duality", check_duality, rows))
    if "asymptotic" in checks:
        for pair in ASYMPTOTIC_PAIRS:
            name = f"asymptotic[{pair[0]}~{pair[1]}]"
            if "mu_f" in pair and not include_mu_f:
                verdicts.append(not_applicable(name, "mu_f not computed"))
            elif pair == ("mu3", "mu2") and not one_to_one:
                verdicts.append(not_applicable(name, "parameter Jacobian is not one-to-one",
                                               regime="differential-only"))
            else:
                verdicts.append(guarded(name, check_asymptotic_equality, rows, pair))
    if "differential" in checks:
        verdicts.append(guarded("differential[mu3~mu2]", check_differential_equivalence,
                                rows, one_to_one=one_to_one))
    if "lipschitz" in checks:
        if include_mu_f:
            verdicts.append(guarded("lipschitz", check_lipschitz, rows))
        else:
            verdicts.append(not_applicable("lipschitz", "mu_f not computed"))
    return verdicts


def cmd_sweep(args) -> int:
    checks = tuple(c.strip() for c in args.checks.split(",") if c.strip())
    config = RunConfig(
        problem_source=args.problem or args.builtin,
        direction=args.direction or "",
        t_range=(args.t_start, args.t_stop, args.per_decade),
        checks=checks,
        output=args.out,
        format=args.format,
        include_mu_f=not args.no_mu_f,
    )
    prob = _make_problem(args)
    direction, origin = resolve_direction(config.direction, prob.system.n)
    spec = SweepSpec(tuple(direction), geometric_t_values(*config.t_range), config.include_mu_f)
    rows = run_sweep(prob, spec)
    verdicts = sweep_verdicts(rows, prob, config.checks, config.include_mu_f)

    meta = {
        "problem": prob.system.name,
        "dims": f"m={prob.system.m} n={prob.system.n} p={prob.system.p}",
        "direction": ",".join(format(v, ".17g") for v in spec.direction),
        "direction_source": origin,
        "t_start": format(config.t_range[0], ".17g"),
        "t_stop": format(config.t_range[1], ".17g"),
        "per_decade": config.t_range[2],
        "checks": ",".join(config.checks),
        "h6_one_to_one": prob.report.h6_one_to_one,
    }
    report = emit_report(rows, verdicts, config.format, meta)
    if config.output:
        Path(config.output).write_bytes(report)
        summary = sys.stdout
    else:
        sys.stdout.buffer.write(report)
        sys.stdout.flush()
        summary = sys.stderr
    for v in verdicts:
        print(v.line(), file=summary)
    failed = [v for v in verdicts if v.applicable and not v.passed]
    return EXIT_VERDICT if failed else EXIT_OK


def read_matrix(path: str) -> np.ndarray:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DimensionMismatch(f"cannot read matrix file: {exc}") from None
    rows = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            rows.append([float(v) for v in line.split()])
        except ValueError:
            raise ParseError(f"non-numeric entry in {line.strip()!r}", lineno, 1) from None
    if not rows or len({len(r) for r in rows}) != 1:
        raise DimensionMismatch("matrix file must hold equal-length rows of numbers")
    return np.array(rows, dtype=float)


def cmd_lowerbound(args) -> int:
    a = read_matrix(args.matrix)
    try:
        norm = VectorNormKind.coerce(args.norm)
    except ValueError:
        raise UsageError(f"unknown norm {args.norm!r}") from None
    result = matrix_lower_bound(a, norm, samples=args.samples, seed=args.seed) \
        if norm is not VectorNormKind.TWO else matrix_lower_bound(a, norm)
    if isinstance(result, Bracket):
        print(f"[{result.lo:.15g}, {result.hi:.15g}]")
    else:
        print(f"{result:.15g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="minpert", description="Minimal perturbations to roots of parameterized equations.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def problem_args(p):
        group = p.add_mutually_exclusive_group(required=True)
        group.add_argument("--builtin", help="name of a registered problem")
        group.add_argument("--problem", help="path to a problem file")

    solve = sub.add_parser("solve", help="all four values at one x")
    problem_args(solve)
    solve.add_argument("--x", help="comma-separated parameter value")
    solve.set_defaults(func=cmd_solve)

    sweep = sub.add_parser("sweep", help="sweep a ray toward x0 and check the equivalences")
    problem_args(sweep)
    sweep.add_argument("--direction", help="comma-separated vector or random:SEED (default e1)")
    sweep.add_argument("--t-start", type=float, default=1e-1)
    sweep.add_argument("--t-stop", type=float, default=1e-7)
    sweep.add_argument("--per-decade", type=int, default=3)
    sweep.add_argument("--checks", default=",".join(CHECKS))
    sweep.add_argument("--format", default="csv")
    sweep.add_argument("--out")
    sweep.add_argument("--no-mu-f", action="store_true")
    sweep.set_defaults(func=cmd_sweep)

    lower = sub.add_parser("lowerbound", help="matrix lower bound of a matrix file")
    lower.add_argument("matrix")
    lower.add_argument("--norm", default="two")
    lower.add_argument("--samples", type=int, default=None)
    lower.add_argument("--seed", type=int, default=0)
    lower.set_defaults(func=cmd_lowerbound)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # --help exits 0, argument errors exit 64
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"minpert: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HypothesisFailure as exc:
        print(f"minpert: hypotheses fail: {exc}", file=sys.stderr)
        if exc.report is not None:
            print(exc.report.summary(), file=sys.stderr)
        return EXIT_INPUT
    except (UnknownBuiltin, ParseError, DimensionMismatch, ZeroMatrix) as exc:
        print(f"minpert: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NoConvergence, RankDeficient) as exc:
        print(f"minpert: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except MinPertError as exc:
        print(f"minpert: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
