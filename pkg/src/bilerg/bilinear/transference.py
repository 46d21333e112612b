"""
Transference between the torus averages and planar integrals.

For a base point ``x`` the observables are pulled back along the orbit box,
``F_j(u, v) = f_j(S^u T^v x)`` on ``[0, 3N] x [0, 2N^2]``, and the truncated
difference integral

    G_x(u, v) = (1/N) int_0^N (F1(u+t+delta, v) - F1(u+t, v)) F2(u, v+t^2) dt

is compared, in L^1 and after averaging over ``x``, with the torus L^1 norm
of the difference average.  For trigonometric polynomials the ``t``-integral
of every pair of modes is a chirp integral over ``[0, T(u, v)]``, so ``G_x``
is evaluated exactly at the grid nodes and only the ``(u, v)`` integral is
a Riemann sum.
"""

from dataclasses import dataclass

import numpy as np

from ..averages import difference_average, mean_and_se
from ..dynamics import embed_transfer_function
from ..errors import ConfigurationError, DomainError
from ..numerics import chirp_integral, lp_norm

__all__ = ["TransferenceResult", "NormAccounting", "transference_check", "transfer_norm_accounting"]


@dataclass(frozen=True)
class TransferenceResult:
    ergodic_lhs: float
    transfer_rhs: float
    lhs_se: float
    rhs_se: float
    quadrature_tol: float
    holds: bool
    n_samples: int

    @property
    def combined_se(self):
        return float(np.hypot(self.lhs_se, self.rhs_se))


@dataclass(frozen=True)
class NormAccounting:
    mean_norm_sq: float
    se: float
    expected: float
    rel_error: float


def _check_padding(grid, N):
    if N < 1:
        raise ConfigurationError("transference needs N >= 1")
    if grid.period_u < 3 * N + 4 or grid.period_v < 2 * N * N + 4:
        raise ConfigurationError(
            f"grid {grid.period_u}x{grid.period_v} too small for N={N}: "
            f"need >= {3 * N + 4} x {2 * N * N + 4}"
        )


def _pair_kernels(sys, f1, f2, u, v, N, delta):
    """x-independent kernels ``M_{k,m}(u, v)``, one row per mode pair."""
    a = f1.frequencies @ sys.s_direction
    a_t = f1.frequencies @ sys.t_direction
    b = f2.frequencies @ sys.s_direction
    b_t = f2.frequencies @ sys.t_direction

    def upper(d):
        return np.clip(np.minimum(np.minimum(N, 3 * N - u - d), np.sqrt(np.clip(2 * N * N - v, 0, None))), 0, None)

    top_d, top_0 = upper(delta), upper(0.0)
    zero = np.zeros_like(u)
    rows = []
    for i in range(len(f1)):
        for j in range(len(f2)):
            al = np.full_like(u, a[i])
            be = np.full_like(u, b_t[j])
            inner = np.exp(2j * np.pi * a[i] * delta) * chirp_integral(al, be, zero, top_d)
            inner = inner - chirp_integral(al, be, zero, top_0)
            phase = np.exp(2j * np.pi * ((a[i] + b[j]) * u + (a_t[i] + b_t[j]) * v))
            rows.append(phase * inner)
    return np.array(rows)


def _pair_weights(f1, f2, X):
    # c_k d_m e((k + m) . x) for every pair, shape (n_x, pairs)
    w1 = f1.coefficients[None, :] * np.exp(2j * np.pi * X @ f1.frequencies.T)
    w2 = f2.coefficients[None, :] * np.exp(2j * np.pi * X @ f2.frequencies.T)
    return (w1[:, :, None] * w2[:, None, :]).reshape(len(X), -1)


def transference_check(sys, f1, f2, x_samples, N, delta, grid, kappa=2.0, chunk=2**22):
    """Compare both sides of the transference inequality by Monte Carlo.

    Parameters
    ----------
    x_samples : array_like, shape (n, d)
        Base points; the same points drive both estimates.
    grid : Grid2D
        Nodes for the ``(u, v)`` Riemann sum; periods must cover the padded
        box ``[0, 3N+4] x [0, 2N^2+4]``.

    Returns
    -------
    TransferenceResult
        ``holds`` is ``lhs <= rhs + 3 * combined_se + quadrature_tol``; the
        quadrature tolerance is the change of the right-hand side when every
        other node is dropped in each direction.
    """
    if kappa != 2:
        raise DomainError("transference is implemented for the quadratic case kappa = 2")
    if not 0 < delta <= 1:
        raise DomainError(f"delta must lie in (0, 1], got {delta}")
    _check_padding(grid, N)
    X = np.atleast_2d(np.asarray(x_samples, dtype=float))
    if X.shape[1] != sys.dimension:
        raise ConfigurationError("x samples do not match the system dimension")

    iu = np.nonzero(grid.u <= 3 * N)[0]
    iv = np.nonzero(grid.v <= 2 * N * N)[0]
    U, V = np.meshgrid(grid.u[iu], grid.v[iv], indexing="ij")
    coarse = ((iu[:, None] % 2 == 0) & (iv[None, :] % 2 == 0)).ravel()
    M = _pair_kernels(sys, f1, f2, U.ravel(), V.ravel(), N, delta)
    W = _pair_weights(f1, f2, X)

    fine, rough = [], []
    step = max(1, chunk // max(M.shape[1], 1))
    for s in range(0, len(X), step):
        G = np.abs(W[s : s + step] @ M) / N
        fine.append(G.sum(axis=1) * grid.cell_area)
        rough.append(G[:, coarse].sum(axis=1) * 4 * grid.cell_area)
    fine = np.concatenate(fine) / N**3
    rough = np.concatenate(rough) / N**3

    lhs_vals = np.abs(difference_average(sys, f1, f2, X, N, delta, kappa))
    lhs, lhs_se = mean_and_se(lhs_vals)
    rhs, rhs_se = mean_and_se(fine)
    qtol = abs(rhs - float(np.mean(rough))) + 1e-12
    holds = lhs <= rhs + 3 * float(np.hypot(lhs_se, rhs_se)) + qtol
    return TransferenceResult(lhs, rhs, lhs_se, rhs_se, qtol, bool(holds), len(X))


def transfer_norm_accounting(sys, f, x_samples, N, grid):
    """Mean of ``||F^{x,N}||_2^2`` over ``x`` against ``6 N^3 ||f||_2^2``."""
    X = np.atleast_2d(np.asarray(x_samples, dtype=float))
    vals = [lp_norm(embed_transfer_function(sys, f, x, N, grid), 2) ** 2 for x in X]
    mean, se = mean_and_se(vals)
    expected = 6 * N**3 * f.l2_norm() ** 2
    return NormAccounting(mean, se, expected, abs(mean - expected) / expected)
