"""
Sweeping toward the anchor
==========================

A sweep evaluates all four values along x0 + t d for a geometric grid of t
and then asks whether each pair approaches ratio 1 as t shrinks.  The
parabola problem is the interesting one: its y-Jacobian moves with x and
its residual is curved in x, so no two values coincide.
"""

import sys

from minpert import (
    AnchoredProblem,
    SweepSpec,
    builtin,
    check_asymptotic_equality,
    check_differential_equivalence,
    check_lipschitz,
    emit_report,
    run_sweep,
)

prob = AnchoredProblem(*builtin("parabola-underdet"))
rows = run_sweep(prob, SweepSpec((1.0,)))

for row in rows[::3]:
    print(f"t={row.t:.2e}  r1={row.r1}  r2={row.r2}  r3={row.r3}  |mu3-mu2|/t={row.diff_quotient:.3e}")

verdicts = [check_asymptotic_equality(rows, pair)
            for pair in [("mu1", "mu_f"), ("mu2", "mu1"), ("mu2", "mu_f"), ("mu3", "mu2")]]
verdicts += [check_differential_equivalence(rows), check_lipschitz(rows)]
for v in verdicts:
    print(v.line())

# the same data as a CSV report
sys.stdout.write(emit_report(rows[:3], verdicts).decode())
