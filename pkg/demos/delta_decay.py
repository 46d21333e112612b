"""How the planar operator B_delta shrinks as the shift delta goes to zero.

Random band-limited pairs are split at radius R = delta^(-1/2).  The low part
pays a factor |e(delta xi) - 1| ~ delta R and the high part is small because
of oscillation, so the total falls off like a positive power of delta.
"""

import numpy as np

from bilerg.bilinear import band_limited_family, delta_decay_experiment
from bilerg.numerics import Grid2D

grid = Grid2D(8.0, 8.0, 64, 64)
pairs = band_limited_family(grid, np.random.default_rng(1), 6, 3.0, 2.0, n_modes=4)
deltas = [2.0**-k for k in range(1, 9)]
rep = delta_decay_experiment(pairs, deltas)

print(f"{'delta':>10} {'R':>8} {'low':>12} {'high':>12} {'total':>12}")
for d, R, lo, hi, tot in zip(rep.deltas, rep.radii, rep.norm_low, rep.norm_high, rep.norm_total):
    print(f"{d:10.5f} {R:8.3f} {lo:12.4e} {hi:12.4e} {tot:12.4e}")
if rep.fit is not None:
    print(f"\ntotal ~ delta^{rep.fit.exponent:.3f} (r^2 = {rep.fit.r_squared:.3f})")
for note in rep.notes:
    print("note:", note)
