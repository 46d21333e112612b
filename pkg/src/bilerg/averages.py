"""
Continuous-time bilinear averages along commuting flows.

    A_N(f1, f2)(x) = (1/N) int_0^N f1(S^t x) f2(T^{t^kappa} x) dt

For trigonometric polynomials the integrand splits into mode pairs
``c_k d_m e(k.x + m.x) exp(2 pi i (alpha_k t + beta_m t^kappa))`` with
``alpha_k = k . s_dir`` and ``beta_m = m . t_dir``.  The time integrals do
not depend on ``x``, so they are computed once per pair (closed form when
``kappa == 2``) and reused for every sample point.  A direct quadrature of
the pointwise integrand is available as ``method="quadrature"``.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .dynamics import TorusPoint, TrigPolynomial, koopman_apply
from .errors import ConfigurationError, DomainError
from .numerics import DEFAULT_RULE, QuadratureRule, chirp_integral, integrate_1d

__all__ = [
    "AverageRequest",
    "LacunarySchedule",
    "TrajectoryRecord",
    "ExponentPair",
    "SandwichResult",
    "MaximalChainResult",
    "phase_integral",
    "compute_average",
    "single_quadratic_average",
    "difference_average",
    "lacunary_trajectory",
    "sandwich_check",
    "maximal_chain_check",
    "maximal_average",
    "sample_points",
    "mean_and_se",
]


@dataclass(frozen=True)
class AverageRequest:
    N: float
    kappa: float = 2.0
    rule: QuadratureRule = DEFAULT_RULE
    method: str = "auto"

    def __post_init__(self):
        if not self.N > 0:
            raise DomainError(f"averaging length must be positive, got N={self.N}")
        if not self.kappa > 0:
            raise DomainError(f"kappa must be positive, got {self.kappa}")
        if self.method not in ("auto", "modal", "quadrature"):
            raise ConfigurationError(f"unknown averaging method {self.method!r}")
        if self.kappa == 1:
            warnings.warn(
                "kappa = 1 gives linear-linear averages, outside the quadratic setting",
                stacklevel=3,
            )


@dataclass(frozen=True)
class LacunarySchedule:
    """Scales ``alpha**n`` for ``n = 0..n_max``."""

    alpha: float
    n_max: int

    def __post_init__(self):
        if not self.alpha > 1:
            raise DomainError("lacunary ratio must exceed 1")
        if self.n_max < 0:
            raise DomainError("n_max must be non-negative")

    @property
    def scales(self):
        return [self.alpha**n for n in range(self.n_max + 1)]


@dataclass
class TrajectoryRecord:
    scales: list
    values: list
    limit_estimate: complex = None
    cauchy_residual: float = 0.0

    def to_rows(self):
        return [
            {"scale": s, "re": v.real, "im": v.imag, "abs": abs(v)}
            for s, v in zip(self.scales, self.values)
        ]


@dataclass(frozen=True)
class ExponentPair:
    p: float
    q: float

    def __post_init__(self):
        if not (1 < self.p < math.inf and 1 < self.q < math.inf):
            raise DomainError("exponents must lie in (1, inf)")
        if abs(1 / self.p + 1 / self.q - 1) > 1e-12:
            raise DomainError(f"1/p + 1/q must equal 1, got p={self.p}, q={self.q}")

    @classmethod
    def dual(cls, p):
        return cls(p, p / (p - 1))


@dataclass(frozen=True)
class SandwichResult:
    lower: float
    middle: float
    upper: float
    holds: bool


@dataclass(frozen=True)
class MaximalChainResult:
    lhs: np.ndarray
    rhs: np.ndarray
    holds: np.ndarray
    m_max: int


def _points(x):
    if isinstance(x, TorusPoint):
        return x.coordinates, True
    a = np.asarray(x, dtype=float)
    return a, a.ndim == 1


def _stationary_points(alpha, beta, kappa, t0, t1):
    # zeros of alpha + kappa beta t^(kappa-1) inside (t0, t1)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = -alpha / (kappa * beta)
        t = np.where((beta != 0) & (r > 0), r ** (1.0 / (kappa - 1)), np.nan)
    t = t[np.isfinite(t)]
    return np.unique(t[(t > t0) & (t < t1)])


def phase_integral(alpha, beta, kappa, t0, t1, rule=None):
    """``int_{t0}^{t1} exp(2 pi i (alpha t + beta t^kappa)) dt`` for arrays of pairs.

    Exact for ``kappa == 2`` and for ``beta == 0``; otherwise a converged
    composite Gauss rule with breakpoints at the stationary points.
    """
    alpha, beta = np.broadcast_arrays(np.asarray(alpha, float), np.asarray(beta, float))
    if kappa == 2:
        return chirp_integral(alpha, beta, t0, t1)
    out = chirp_integral(alpha, 0.0 * beta, t0, t1)
    out = np.array(out, dtype=complex, ndmin=1).reshape(alpha.shape)
    curved = beta != 0
    if np.any(curved):
        a, b = alpha[curved], beta[curved]

        def integrand(t):
            return np.exp(2j * np.pi * (np.outer(t, a) + np.outer(t**kappa, b)))

        pts = _stationary_points(a, b, kappa, t0, t1) if kappa != 1 else None
        out[curved] = integrate_1d(integrand, t0, t1, rule, points=pts)
    return out


def _pair_integrals(sys, f1, f2, N, kappa, rule):
    alpha = f1.frequencies @ sys.s_direction
    beta = f2.frequencies @ sys.t_direction
    A, B = np.meshgrid(alpha, beta, indexing="ij")
    return phase_integral(A, B, kappa, 0.0, N, rule)


def _modal_average(sys, f1, f2, X, N, kappa, rule):
    J = _pair_integrals(sys, f1, f2, N, kappa, rule)
    e1 = np.exp(2j * np.pi * (X @ f1.frequencies.T)) * f1.coefficients
    e2 = np.exp(2j * np.pi * (X @ f2.frequencies.T)) * f2.coefficients
    return np.einsum("...k,km,...m->...", e1, J, e2) / N


def _quadrature_average(sys, f1, f2, X, N, kappa, rule):
    Xf = X.reshape(-1, sys.dimension)

    def integrand(t):
        p1 = Xf[None, :, :] + t[:, None, None] * sys.s_direction
        p2 = Xf[None, :, :] + (t**kappa)[:, None, None] * sys.t_direction
        return f1(p1) * f2(p2)

    val = integrate_1d(integrand, 0.0, N, rule, max_nodes=max(8, 2**16 // max(1, len(Xf))))
    return np.asarray(val).reshape(X.shape[:-1]) / N


def _check(sys, *fs):
    for f in fs:
        if f.dimension != sys.dimension:
            raise ConfigurationError("observable dimension does not match flow")


def compute_average(sys, f1, f2, x, req):
    """``A_N(f1, f2)(x)`` for one point or an ``(n, d)`` array of points."""
    _check(sys, f1, f2)
    X, single = _points(x)
    if req.method == "quadrature":
        val = _quadrature_average(sys, f1, f2, X, req.N, req.kappa, req.rule)
    else:
        val = _modal_average(sys, f1, f2, X, req.N, req.kappa, req.rule)
    return complex(val) if single else val


def single_quadratic_average(sys, f2, x, N, kappa=2.0, rule=None, method="auto"):
    """``(1/N) int_0^N f2(T^{t^kappa} x) dt``."""
    one = TrigPolynomial.constant(1.0, sys.dimension)
    return compute_average(sys, one, f2, x, AverageRequest(N, kappa, rule or DEFAULT_RULE, method))


def difference_average(sys, f1, f2, x, N, delta, kappa=2.0, rule=None, method="auto"):
    """Average of ``(f1(S^{t+delta} x) - f1(S^t x)) f2(T^{t^kappa} x)``."""
    if not 0 < delta <= 1:
        raise DomainError(f"delta must lie in (0, 1], got {delta}")
    diff = koopman_apply(sys, f1, delta, 0.0) - f1
    return compute_average(sys, diff, f2, x, AverageRequest(N, kappa, rule or DEFAULT_RULE, method))


def lacunary_trajectory(sys, f1, f2, x, sched, kappa=2.0, rule=None, rel_threshold=1e-3):
    """Averages along the scales ``alpha**n`` with a Cauchy-type limit test.

    The residual is the largest pairwise distance among the last three
    values; a limit is declared when it drops below
    ``rel_threshold * (1 + |last value|)``.
    """
    rule = rule or DEFAULT_RULE
    values = [compute_average(sys, f1, f2, x, AverageRequest(N, kappa, rule)) for N in sched.scales]
    tail = values[-3:]
    residual = max((abs(a - b) for a in tail for b in tail), default=0.0)
    limit = None
    if len(values) >= 3 and residual < rel_threshold * (1 + abs(values[-1])):
        limit = values[-1]
    return TrajectoryRecord(list(sched.scales), values, limit, float(residual))


def _require_nonnegative(f, name):
    coeff = f.coefficients
    scale = max(f.sup_bound(), 1e-300)
    if f.coefficient_distance(f.conj()) > 1e-12 * scale:
        raise DomainError(f"{name} is not real-valued")
    K = int(np.max(np.abs(f.frequencies))) if len(f) else 0
    n = max(8, 4 * K + 4)
    axes = [np.arange(n) / n] * f.dimension
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    vals = f(mesh).real
    if vals.min() < -1e-12 * scale or not np.all(np.isfinite(coeff)):
        raise DomainError(f"{name} takes negative values (min {vals.min():.3e})")


def lacunary_index(alpha, N):
    """``floor(log_alpha N)`` with exact powers of ``alpha`` landing on themselves."""
    n = math.floor(math.log(N) / math.log(alpha))
    while alpha ** (n + 1) <= N * (1 + 1e-12):
        n += 1
    while alpha**n > N * (1 + 1e-12):
        n -= 1
    return n


def sandwich_check(sys, f1, f2, x, alpha, N, kappa=2.0, rule=None, tol=1e-9):
    """Compare ``A_N`` with the two neighbouring lacunary scales.

    For non-negative ``f1, f2``:
    ``alpha^-1 A_{alpha^n} <= A_N <= alpha A_{alpha^(n+1)}``, ``n = floor(log_alpha N)``.
    """
    if not alpha > 1:
        raise DomainError("lacunary ratio must exceed 1")
    _require_nonnegative(f1, "f1")
    _require_nonnegative(f2, "f2")
    rule = rule or DEFAULT_RULE
    n = lacunary_index(alpha, N)

    def avg(M):
        return compute_average(sys, f1, f2, x, AverageRequest(M, kappa, rule)).real

    lower = avg(alpha**n) / alpha
    middle = avg(N)
    upper = alpha * avg(alpha ** (n + 1))
    slack = tol * max(1.0, abs(upper))
    return SandwichResult(lower, middle, upper, bool(lower <= middle + slack and middle <= upper + slack))


def _power_average(values_fn, lo, hi, X, power, rule):
    def integrand(t):
        return np.abs(values_fn(X[None, :, :], t[:, None, None])) ** power

    return np.asarray(integrate_1d(integrand, lo, hi, rule, max_nodes=max(8, 2**16 // len(X)))).real


def maximal_chain_check(sys, f1, f2, x, N, exps, m_max=None, rule=None, resolution=1e-6, tol=1e-6):
    """Check the Hoelder plus dyadic-splitting bound for ``|A_N(f1, f2)(x)|``.

    The right-hand side is

        (1/N int_0^N |f1(S^t x)|^p dt)^(1/p)
          * (sum_{m<=m_max} 2^(-m/2) avg_{[0, 2^(1-m) N^2]} |f2(T^s x)|^q + tail)^(1/q)

    with the tail bounded by ``sum_{m>m_max} 2^(-m/2) * (sum |d_k|)^q``, so
    truncation never makes the inequality false.  Quadratic time only.
    """
    if not isinstance(exps, ExponentPair):
        exps = ExponentPair(*exps)
    if N < 1:
        raise DomainError("maximal chain needs N >= 1")
    _check(sys, f1, f2)
    rule = rule or DEFAULT_RULE
    X, single = _points(x)
    X = X.reshape(-1, sys.dimension)
    p, q = exps.p, exps.q
    if m_max is None:
        m_max = max(1, math.ceil(math.log2(N * N / resolution)))

    lhs = np.abs(compute_average(sys, f1, f2, X, AverageRequest(N, 2.0, rule)))

    def along_s(P, t):
        return f1(P + t * sys.s_direction)

    def along_t(P, s):
        return f2(P + s * sys.t_direction)

    first = _power_average(along_s, 0.0, N, X, p, rule) / N

    # nested integrals over [0, L_m], L_m = 2^(1-m) N^2, built from dyadic pieces
    L = [2.0 ** (1 - m) * N * N for m in range(1, m_max + 2)]
    cumulative = _power_average(along_t, 0.0, L[-1], X, q, rule)
    integrals = [None] * (m_max + 1)
    integrals[m_max] = cumulative
    for m in range(m_max, 0, -1):
        cumulative = cumulative + _power_average(along_t, L[m], L[m - 1], X, q, rule)
        integrals[m - 1] = cumulative
    series = sum(2.0 ** (-m / 2) * integrals[m - 1] / L[m - 1] for m in range(1, m_max + 1))
    tail = 2.0 ** (-(m_max + 1) / 2) / (1 - 2.0**-0.5) * f2.sup_bound() ** q
    rhs = first ** (1 / p) * (series + tail) ** (1 / q)
    holds = lhs <= rhs + tol
    if single:
        return MaximalChainResult(float(lhs[0]), float(rhs[0]), bool(holds[0]), m_max)
    return MaximalChainResult(lhs, rhs, holds, m_max)


def maximal_average(sys, f1, f2, x, N_grid, kappa=2.0, rule=None):
    """``max_N |A_N(f1, f2)(x)|`` over a finite grid of lengths."""
    rule = rule or DEFAULT_RULE
    vals = [np.abs(compute_average(sys, f1, f2, x, AverageRequest(N, kappa, rule))) for N in N_grid]
    return np.max(np.stack(vals), axis=0)


def sample_points(rng, n, d):
    """``n`` uniform points on the d-torus."""
    return rng.random((n, d))


def mean_and_se(values):
    """Sample mean and its standard error."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size < 2:
        return float(v.mean()), math.inf
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))
