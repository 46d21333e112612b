"""
Reference evaluations that avoid the FFT path.

The brute-force operator reads ``F1`` and ``F2`` through an explicit sum
over their (few) non-zero Fourier modes and integrates in time with
scipy's adaptive Gauss-Kronrod ``quad_vec``, one vector of window points at
a time.  It is slow and meant for small grids and sparse spectra only.
"""

import numpy as np
from scipy.integrate import quad_vec

from ..errors import ConfigurationError
from ..numerics import GridFunction2D, dft_forward
from .operators import window_indices

__all__ = ["sparse_modes", "brute_force_B_delta", "brute_force_local_operator"]


def sparse_modes(F, rel_cut=1e-13):
    """Non-negligible modes of ``F`` as ``(xi_u, xi_v, c)`` arrays."""
    g = F.grid
    c = dft_forward(F).coefficients
    cut = rel_cut * max(np.abs(c).max(), 1e-300)
    i, j = np.nonzero(np.abs(c) > cut)
    if np.any(i == g.n_u // 2) or np.any(j == g.n_v // 2):
        raise ConfigurationError("brute-force oracle does not handle Nyquist content")
    return g.xi_u[i], g.xi_v[j], c[i, j]


def _evaluate(modes, x, y):
    xu, xv, c = modes
    return np.exp(2j * np.pi * (np.multiply.outer(x, xu) + np.multiply.outer(y, xv))) @ c


def _brute(F1, F2, cutoff, kappa, shifts, epsrel):
    g = F1.grid
    rows, cols = window_indices(g, cutoff)
    X, Y = np.meshgrid(g.u[rows], g.v[cols], indexing="ij")
    X, Y = X.ravel(), Y.ravel()
    cu, cv = cutoff.center
    eta = cutoff.eta(X - cu, Y - cv)
    m1, m2 = sparse_modes(F1), sparse_modes(F2)

    def integrand(t):
        first = sum(sign * _evaluate(m1, X + t + s, Y) for sign, s in shifts)
        return first * _evaluate(m2, X, Y + t**kappa) * eta * cutoff.phi(np.array([t]))[0]

    lo, hi = cutoff.phi_support
    inner = [p for p in cutoff.phi_breakpoints if lo < p < hi]
    val, _ = quad_vec(integrand, lo, hi, epsabs=1e-14, epsrel=epsrel, points=inner, limit=10000)
    out = np.zeros(g.shape, dtype=complex)
    out[np.ix_(rows, cols)] = val.reshape(rows.size, cols.size)
    return GridFunction2D(g, out)


def brute_force_B_delta(F1, F2, cutoff, delta, kappa=2.0, epsrel=1e-12):
    """``B_delta`` by direct mode summation and adaptive quadrature."""
    return _brute(F1, F2, cutoff, kappa, [(1.0, delta), (-1.0, 0.0)], epsrel)


def brute_force_local_operator(F1, F2, cutoff, kappa=2.0, epsrel=1e-12):
    return _brute(F1, F2, cutoff, kappa, [(1.0, 0.0)], epsrel)
