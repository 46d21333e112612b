"""
Operators on planar grid functions.

The trilinear time integrals

    B_delta(F1, F2)(x, y) = int (F1(x+t+delta, y) - F1(x+t, y)) F2(x, y+t^kappa) zeta(x, y, t) dt
    L(F1, F2)(x, y)       = int F1(x+t, y) F2(x, y+t^kappa) zeta(x, y, t) dt

are evaluated by shifting the trigonometric interpolants of ``F1`` and
``F2`` with FFT phase multipliers at each quadrature node.  Only the block
of the grid where ``eta`` is non-zero is ever formed.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, DomainError
from ..numerics import (
    GridFunction2D,
    QuadratureRule,
    dft_forward,
    integrate_1d,
    interpolate_tensor,
    lp_norm,
    shift_multiplier,
    translate,
)

__all__ = [
    "BandSplit",
    "ShiftDifference",
    "DyadicDecomposition",
    "apply_B_delta",
    "apply_local_operator",
    "band_split",
    "shift_difference_norm",
    "rescale_parabolic",
    "dyadic_scale_decomposition",
    "window_indices",
]

FIELD_RULE = QuadratureRule(panels=1, nodes_per_panel=32, rel_tol=1e-10)


def window_indices(grid, cutoff):
    """Row and column indices of the grid where ``eta`` can be non-zero."""
    cu, cv = cutoff.center
    rows = np.nonzero(np.abs(grid.u - cu) < 1.0)[0]
    cols = np.nonzero(np.abs(grid.v - cv) < 1.0)[0]
    return rows, cols


def _check_window(grid, cutoff, shift_u, kappa):
    cu, cv = cutoff.center
    reach_u = cu + 1.0 + 2.0 + shift_u
    reach_v = cv + 1.0 + 2.0**kappa
    if cu - 1.0 < 0 or cv - 1.0 < 0 or reach_u > grid.period_u or reach_v > grid.period_v:
        raise ConfigurationError(
            f"box {grid.period_u}x{grid.period_v} too small: shifted arguments reach "
            f"({reach_u}, {reach_v}) from the cutoff window centred at {cutoff.center}"
        )


def _time_integral(F1, F2, cutoff, kappa, rule, f1_multiplier):
    if F1.grid != F2.grid:
        raise ConfigurationError("F1 and F2 must share a grid")
    g = F1.grid
    rows, cols = window_indices(g, cutoff)
    out = np.zeros(g.shape, dtype=complex)
    if rows.size == 0 or cols.size == 0:
        return GridFunction2D(g, out)
    cu, cv = cutoff.center
    A1 = np.fft.fft(F1.samples[:, cols], axis=0)
    A2 = np.fft.fft(F2.samples[rows, :], axis=1)
    eta = cutoff.eta(g.u[rows, None] - cu, g.v[None, cols] - cv)

    def integrand(t):
        m1 = f1_multiplier(t)
        m2 = shift_multiplier(g.xi_v, g.period_v, g.n_v, t**kappa)
        G1 = np.fft.ifft(A1[None, :, :] * m1[:, :, None], axis=1)[:, rows, :]
        G2 = np.fft.ifft(A2[None, :, :] * m2[:, None, :], axis=2)[:, :, cols]
        return G1 * G2 * (eta[None] * cutoff.phi(t)[:, None, None])

    lo, hi = cutoff.phi_support
    block = max(g.n_u, g.n_v) * max(rows.size, cols.size)
    # inputs set the roundoff scale; an exactly cancelling output is otherwise unconvergeable
    scale = 2 * np.abs(F1.samples).max() * np.abs(F2.samples).max() * (hi - lo)
    val = integrate_1d(
        integrand, lo, hi, rule or FIELD_RULE,
        points=cutoff.phi_breakpoints, max_nodes=max(8, 2**21 // block),
        abs_tol=64 * np.finfo(float).eps * scale,
    )
    out[np.ix_(rows, cols)] = val
    return GridFunction2D(g, out)


def apply_B_delta(F1, F2, cutoff, delta, kappa=2.0, rule=None):
    """The bilinear difference operator ``B_delta`` on a grid.

    ``F1`` and ``F2`` are read through their trigonometric interpolants;
    the cutoff window must leave room for the shifts inside one period.
    """
    if delta < 0:
        raise DomainError("delta must be non-negative")
    _check_window(F1.grid, cutoff, delta, kappa)
    g = F1.grid

    def diff(t):
        return (
            shift_multiplier(g.xi_u, g.period_u, g.n_u, t + delta)
            - shift_multiplier(g.xi_u, g.period_u, g.n_u, t)
        )

    return _time_integral(F1, F2, cutoff, kappa, rule, diff)


def apply_local_operator(F1, F2, cutoff, kappa=2.0, rule=None):
    """Single-copy operator ``int F1(x+t, y) F2(x, y+t^kappa) zeta dt``."""
    _check_window(F1.grid, cutoff, 0.0, kappa)
    g = F1.grid

    def single(t):
        return shift_multiplier(g.xi_u, g.period_u, g.n_u, t)

    return _time_integral(F1, F2, cutoff, kappa, rule, single)


@dataclass(frozen=True)
class BandSplit:
    low: GridFunction2D
    high: GridFunction2D
    R: float


def band_split(F1, R):
    """Split ``F1`` into ``|xi_1| <= R`` (closed) and its complement."""
    if R < 0:
        raise DomainError("band radius must be non-negative")
    g = F1.grid
    c = np.fft.fft2(F1.samples)
    keep = (np.abs(g.xi_u) <= R)[:, None]
    low = np.fft.ifft2(np.where(keep, c, 0.0))
    high = np.fft.ifft2(np.where(keep, 0.0, c))
    return BandSplit(GridFunction2D(g, low), GridFunction2D(g, high), float(R))


@dataclass(frozen=True)
class ShiftDifference:
    spatial: float
    spectral: float
    bound: float = None
    bound_check: bool = None


def shift_difference_norm(F, delta, R=None, band_tol=1e-10):
    """``|| F(. + delta, .) - F ||_2`` computed in space and in frequency.

    With ``R`` given, ``F`` must be band-limited to ``|xi_1| <= R`` and the
    result also carries the bound ``2 pi delta R ||F||_2``.
    """
    g = F.grid
    spatial = lp_norm(translate(F, du=delta) - F, 2)
    c = dft_forward(F).coefficients
    m = shift_multiplier(g.xi_u, g.period_u, g.n_u, delta) - 1.0
    spectral = math.sqrt(g.period_u * g.period_v * float(np.sum(np.abs(c * m[:, None]) ** 2)))
    if R is None:
        return ShiftDifference(spatial, spectral)
    outside = np.abs(g.xi_u) > R
    total = np.sum(np.abs(c) ** 2)
    if total > 0 and np.sum(np.abs(c[outside]) ** 2) > band_tol**2 * total:
        raise DomainError(f"input is not band-limited to |xi_1| <= {R}")
    norm = lp_norm(F, 2)
    bound = 2 * math.pi * abs(delta) * R * norm
    return ShiftDifference(spatial, spectral, bound, bool(spatial <= bound + 1e-12 * norm))


def rescale_parabolic(F, a, center=None):
    """``a^(3/2) F(c + a (x - c_u), c + a^2 (y - c_v))`` about ``center``.

    The box is read as a window of the plane around ``center`` (default the
    box centre); the map is an L^2 isometry for functions that stay inside it.
    """
    if not a > 0:
        raise DomainError("rescaling factor must be positive")
    g = F.grid
    cu, cv = center if center is not None else (g.period_u / 2, g.period_v / 2)
    u_pts = cu + a * (g.u - cu)
    v_pts = cv + a * a * (g.v - cv)
    vals = a**1.5 * interpolate_tensor(F, u_pts, v_pts)
    # the box is one window of the plane, not a period: outside it F is zero
    in_u = (u_pts >= cu - g.period_u / 2) & (u_pts < cu + g.period_u / 2)
    in_v = (v_pts >= cv - g.period_v / 2) & (v_pts < cv + g.period_v / 2)
    return GridFunction2D(g, np.where(in_u[:, None] & in_v[None, :], vals, 0.0))


@dataclass(frozen=True)
class DyadicDecomposition:
    """Intervals ``(2^-k N, 2^(1-k) N]`` with weights ``2^-k``, ``k = 1..K``."""

    N: float
    intervals: tuple
    weights: tuple

    @property
    def residual_mass(self):
        return 1.0 - math.fsum(self.weights)

    def evaluate(self, t):
        """Partial sum ``sum_k w_k 1_{I_k}(t) / |I_k|``."""
        t = np.asarray(t, dtype=float)
        total = np.zeros_like(t)
        for (lo, hi), w in zip(self.intervals, self.weights):
            total = total + np.where((t > lo) & (t <= hi), w / lo, 0.0)
        return total


def dyadic_scale_decomposition(N, K):
    """First ``K`` terms of the dyadic expansion of ``(1/N) 1_(0,N]``."""
    if N < 1:
        raise DomainError("N must be at least 1")
    if K < 1:
        raise DomainError("K must be at least 1")
    intervals = tuple((2.0**-k * N, 2.0 ** (1 - k) * N) for k in range(1, K + 1))
    weights = tuple(2.0**-k for k in range(1, K + 1))
    return DyadicDecomposition(float(N), intervals, weights)
