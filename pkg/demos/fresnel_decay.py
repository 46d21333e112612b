"""Single-mode quadratic averages decay like 1/N.

A unit-frequency mode sampled along ``t -> t^2`` gives the chirp average
``(1/N) int_0^N e(t^2) dt``.  The integral itself tends to the Fresnel value
(1+i)/4, so ``N * A_N`` settles down and the fitted exponent sits near -1.
The closed-form modal path is compared with composite quadrature along the way.
"""

import numpy as np

from bilerg import FlowPair, QuadratureRule, TrigPolynomial, fit_power_law, single_quadratic_average

sys = FlowPair([1.0, 0.0], [0.0, 1.0])
f2 = TrigPolynomial.mode([0, 1])
x = np.zeros(2)
tight = QuadratureRule(rel_tol=1e-12)

print(f"{'N':>8} {'N*A_N (modal)':>28} {'|modal - quadrature|':>22}")
Ns = [2.0**k for k in range(4, 13)]
values = []
for N in Ns:
    a = single_quadratic_average(sys, f2, x, N)
    values.append(abs(a))
    if N <= 512:  # past this the tight rule runs into roundoff
        b = single_quadratic_average(sys, f2, x, N, rule=tight, method="quadrature")
        print(f"{N:8.0f} {N * a:28.6f} {abs(a - b):22.2e}")
    else:
        print(f"{N:8.0f} {N * a:28.6f} {'-':>22}")

fit = fit_power_law(Ns, values)
print(f"\nfitted exponent {fit.exponent:.3f} (r^2 = {fit.r_squared:.4f}); Fresnel target (1+i)/4 = {(1 + 1j) / 4}")
