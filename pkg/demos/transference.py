"""Ergodic difference averages against their planar transfer.

For a few N the Monte Carlo size of the ergodic difference average is set
beside the transferred planar quantity.  The transfer side should dominate,
up to the reported sampling and quadrature slack.
"""

import math

import numpy as np

from bilerg import FlowPair, TrigPolynomial
from bilerg.bilinear import transference_check
from bilerg.numerics import Grid2D

sys = FlowPair([1.0, math.sqrt(2)], [math.sqrt(3), 0.5])
rng = np.random.default_rng(5)
f1 = TrigPolynomial.random(rng, 2, 3, 1)
f2 = TrigPolynomial.random(rng, 2, 3, 1)
X = rng.random((40, 2))

for N, grid in [(1, Grid2D(8.0, 8.0, 256, 256)), (2, Grid2D(16.0, 16.0, 256, 512))]:
    r = transference_check(sys, f1, f2, X, N, 0.25, grid)
    print(f"N={N}: lhs {r.ergodic_lhs:.4e}  rhs {r.transfer_rhs:.4e}  "
          f"slack {3 * r.combined_se + r.quadrature_tol:.2e}  holds={r.holds}")
