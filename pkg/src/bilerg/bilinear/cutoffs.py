"""
Smooth cutoffs: the partition bump, the plateau and the time cutoff.

All profiles are built from the standard bump ``exp(-1/(1-s^2))`` on
``(-1, 1)``.  Smooth steps are mollified indicators, evaluated through the
normalised bump CDF, which is computed with a fixed high-order Gauss rule.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from ..numerics import integrate_1d, QuadratureRule

__all__ = [
    "bump",
    "bump_cdf",
    "smooth_indicator",
    "partition_bump",
    "CutoffSpec",
    "build_cutoffs",
]

_CDF_NODES, _CDF_WEIGHTS = np.polynomial.legendre.leggauss(48)
_CDF_PANELS = 4


def bump(s):
    """Unnormalised standard bump, zero outside ``(-1, 1)``."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def _raw_cdf(z):
    z = np.clip(np.asarray(z, dtype=float), -1.0, 1.0)
    flat = z.ravel()
    # composite Gauss on [-1, z]; panels split the interval evenly
    edges = -1.0 + (flat[:, None] + 1.0) * np.linspace(0.0, 1.0, _CDF_PANELS + 1)[None, :]
    lo, hi = edges[:, :-1], edges[:, 1:]
    half = 0.5 * (hi - lo)
    nodes = (lo + half)[..., None] + half[..., None] * _CDF_NODES
    vals = bump(nodes) * _CDF_WEIGHTS
    return (vals.sum(axis=-1) * half).sum(axis=-1).reshape(z.shape)


_BUMP_MASS = float(_raw_cdf(1.0))


def bump_cdf(z):
    """``int_{-1}^{z} bump / int bump``; 0 below -1 and 1 above 1."""
    z = np.asarray(z, dtype=float)
    out = _raw_cdf(z) / _BUMP_MASS
    out = np.where(z >= 1.0, 1.0, out)
    return np.where(z <= -1.0, 0.0, out)


def smooth_indicator(t, a, b, eps):
    """``1_[a,b]`` mollified by the normalised bump of half-width ``eps``.

    Supported in ``[a - eps, b + eps]`` and equal to 1 on ``[a + eps, b - eps]``.
    """
    t = np.asarray(t, dtype=float)
    return bump_cdf((t - a) / eps) - bump_cdf((t - b) / eps)


def partition_bump(s):
    """1-D bump on ``[-1, 1]`` whose integer translates sum to one."""
    s = np.asarray(s, dtype=float)
    r = s - np.floor(s)
    return bump(s) / (bump(r) + bump(r - 1.0))


@dataclass(frozen=True)
class CutoffSpec:
    """The cutoffs ``eta``, ``eta_tilde``, ``phi_delta`` and ``zeta = eta * phi``.

    ``center`` places ``eta`` inside a computational box: ``zeta(x, y, t)``
    uses ``eta(x - center_u, y - center_v)``.
    """

    delta: float
    center: tuple = (1.0, 1.0)

    def eta(self, x, y):
        return partition_bump(x) * partition_bump(y)

    def eta_tilde(self, x, y):
        return smooth_indicator(x, -15.0, 15.0, 5.0) * smooth_indicator(y, -15.0, 15.0, 5.0)

    def phi(self, t):
        d = self.delta
        return smooth_indicator(t, 1.0 + d / 4, 2.0 - d / 4, d / 8)

    def zeta(self, x, y, t):
        cu, cv = self.center
        return self.eta(np.asarray(x) - cu, np.asarray(y) - cv) * self.phi(t)

    @property
    def phi_support(self):
        d = self.delta
        return (1.0 + d / 8, 2.0 - d / 8)

    @property
    def phi_breakpoints(self):
        """Support ends and plateau ends of ``phi``; smooth in between."""
        d = self.delta
        return [1.0 + d / 8, 1.0 + 3 * d / 8, 2.0 - 3 * d / 8, 2.0 - d / 8]

    def phi_l1_gap(self, rule=None):
        """``|| phi - 1_[1,2] ||_L1`` by quadrature."""
        rule = rule or QuadratureRule(rel_tol=1e-12)

        def integrand(t):
            return np.abs(self.phi(t) - 1.0)

        return float(np.real(integrate_1d(integrand, 1.0, 2.0, rule, points=self.phi_breakpoints)))

    def partition_sum(self, x, y, radius=3):
        """``sum eta_m(x, y)`` over ``m`` in ``[-radius, radius]^2``."""
        ms = np.arange(-radius, radius + 1)
        total = 0.0
        for m1 in ms:
            for m2 in ms:
                total = total + self.eta(np.asarray(x) - m1, np.asarray(y) - m2)
        return total


def build_cutoffs(delta, center=(1.0, 1.0)):
    """Cutoffs for a given ``delta`` in ``(0, 1]``.

    ``phi`` mollifies ``1_[1+delta/4, 2-delta/4]`` with a bump of half-width
    ``delta/8``, so it lives in ``[1+delta/8, 2-delta/8]`` and misses
    ``1_[1,2]`` by exactly ``delta/2`` in L^1.
    """
    if not 0 < delta <= 1:
        raise DomainError(f"cutoff parameter delta must lie in (0, 1], got {delta}")
    return CutoffSpec(float(delta), tuple(float(c) for c in center))
