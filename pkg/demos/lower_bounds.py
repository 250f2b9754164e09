"""
Matrix lower bounds
===================

The lower bound of a matrix A is the largest c with ||A x|| >= c ||x|| on
the row space.  For the 2-norm it is the smallest singular value.  For the
1- and infinity-norms we bracket it: the top from sampled images, the
bottom from the induced norm of the pseudoinverse.
"""

import numpy as np

from minpert import lower_bound_bracket, matrix_lower_bound, smallest_singular_value

rng = np.random.default_rng(0)
a = rng.standard_normal((2, 4))
print("sigma_min      ", smallest_singular_value(a))
print("2-norm bound   ", matrix_lower_bound(a))
print("2-norm bracket ", lower_bound_bracket(a, "two", samples=10_000))
for norm in ("one", "infinity"):
    br = matrix_lower_bound(a, norm, samples=300)
    print(f"{norm:<9} bracket [{br.lo:.6f}, {br.hi:.6f}] width {br.width:.2e}")
