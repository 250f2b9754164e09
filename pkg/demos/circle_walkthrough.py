"""
How close is the nearest root?
==============================

The circle y1^2 + y2^2 = x has the root y0 = (1, 0) at x0 = 1.  Moving x
shifts the circle, and mu_F(x) is how far y0 has to move to land on it
again: |sqrt(x) - 1|.  The three linearized values all equal |1 - x| / 2
here, so they overestimate mu_F by the factor (1 + sqrt(x)) / 2.
"""

import numpy as np

from minpert import AnchoredProblem, builtin, mu_estimates

prob = AnchoredProblem(*builtin("circle"))
print(prob.report.summary())

# one parameter value, everything at once
est = mu_estimates(prob, [1.21])
print(f"x = 1.21: mu_F = {est.mu_f:.6f}, mu1 = {est.mu1:.6f}, mu2 = {est.mu2:.6f}, mu3 = {est.mu3:.6f}")

# the dual side: a certificate u with ||K^T u|| = 1 whose value matches
u = est.certificates["mu1"]
print("certificate", u, "dual value", est.dual_values["mu1"])

# the ratio tends to 1 as x approaches the anchor
for t in (1e-1, 1e-2, 1e-3, 1e-4):
    e = mu_estimates(prob, [1.0 + t])
    print(f"t = {t:.0e}  mu1/mu_F - 1 = {e.mu1 / e.mu_f - 1:.3e}   t/4 = {t / 4:.3e}")

# the nearest root itself
print("nearest root at x = 1.21:", prob.y0 + est.minimizers["mu_f"], "vs", np.array([1.1, 0.0]))
