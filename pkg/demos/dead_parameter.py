"""
A parameter the equations ignore
================================

If d_x F at the anchor is not one-to-one, mu3 vanishes along directions in
its null space while mu2 need not, so mu3/mu2 cannot tend to 1 in general.
The difference |mu3 - mu2| / t still tends to 0.  The harness reports this
as the differential-only regime.
"""

from minpert import Anchor, AnchoredProblem, SweepSpec, builtin, check_differential_equivalence, run_sweep

system, anchor = builtin("circle")
wide = AnchoredProblem(system.with_parameters(2), Anchor(anchor.y0, [1.0, 0.0]))
print(wide.report.summary())

rows = run_sweep(wide, SweepSpec((1.0, 1.0), include_mu_f=False))
print(check_differential_equivalence(rows, one_to_one=wide.report.h6_one_to_one).line())

# along the dead direction everything is zero
row, = run_sweep(wide, SweepSpec((0.0, 1.0), (0.1,), include_mu_f=False))
print("direction (0, 1):", row.mu2, row.mu3)
