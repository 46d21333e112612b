"""
Commuting translation flows on tori and exact Koopman algebra.

Observables are trigonometric polynomials, stored as an integer frequency
matrix plus a coefficient vector, so composition with a translation is a
phase multiplication and every L^2 identity holds coefficientwise.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError, ResonanceError
from .numerics import GridFunction2D

__all__ = [
    "TorusPoint",
    "FlowPair",
    "TrigPolynomial",
    "CoboundaryDecomposition",
    "flow_apply",
    "koopman_apply",
    "coboundary_decompose",
    "embed_transfer_function",
]


def _readonly(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class TorusPoint:
    """A point of the d-torus, coordinates reduced into ``[0, 1)``."""

    coordinates: np.ndarray

    def __post_init__(self):
        c = np.mod(np.asarray(self.coordinates, dtype=float).ravel(), 1.0)
        # mod can return exactly 1.0 for tiny negative inputs
        c[c >= 1.0] = 0.0
        object.__setattr__(self, "coordinates", _readonly(c, float))

    @property
    def dimension(self):
        return self.coordinates.size

    def __iter__(self):
        return iter(self.coordinates.tolist())

    def __repr__(self):
        return f"TorusPoint({self.coordinates.tolist()})"


@dataclass(frozen=True, eq=False)
class FlowPair:
    """Two commuting translation flows ``S^s x = x + s a`` and ``T^t x = x + t b``."""

    s_direction: np.ndarray
    t_direction: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s_direction, dtype=float).ravel()
        t = np.asarray(self.t_direction, dtype=float).ravel()
        if s.size != t.size or s.size == 0:
            raise ConfigurationError("flow directions must be non-empty and of equal length")
        object.__setattr__(self, "s_direction", _readonly(s, float))
        object.__setattr__(self, "t_direction", _readonly(t, float))

    @property
    def dimension(self):
        return self.s_direction.size

    def to_json(self):
        return json.dumps(
            {"d": self.dimension, "s_dir": self.s_direction.tolist(), "t_dir": self.t_direction.tolist()}
        )

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        sys = cls(data["s_dir"], data["t_dir"])
        if "d" in data and int(data["d"]) != sys.dimension:
            raise ConfigurationError("FlowPair 'd' does not match direction length")
        return sys


@dataclass(frozen=True, eq=False)
class TrigPolynomial:
    """Finite Fourier sum ``f(x) = sum_k c_k e(k . x)`` on the d-torus.

    ``frequencies`` is an ``(m, d)`` integer array with distinct rows and
    ``coefficients`` the matching complex vector.  Zero coefficients are kept
    only if explicitly passed; use :meth:`simplify` to drop them.
    """

    frequencies: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.frequencies, dtype=np.int64)
        c = np.asarray(self.coefficients, dtype=complex).ravel()
        if k.ndim == 1:
            k = k.reshape(c.size, -1) if c.size else k.reshape(0, max(k.size, 1))
        if k.ndim != 2 or k.shape[0] != c.size:
            raise ConfigurationError("frequencies must be an (m, d) array matching coefficients")
        if k.shape[0]:
            uniq, inv = np.unique(k, axis=0, return_inverse=True)
            if uniq.shape[0] != k.shape[0]:
                merged = np.zeros(uniq.shape[0], dtype=complex)
                np.add.at(merged, inv.ravel(), c)
                k, c = uniq, merged
        object.__setattr__(self, "frequencies", _readonly(k, np.int64))
        object.__setattr__(self, "coefficients", _readonly(c, complex))

    # construction -----------------------------------------------------
    @classmethod
    def constant(cls, value, dimension):
        return cls(np.zeros((1, dimension), dtype=np.int64), [value])

    @classmethod
    def mode(cls, k, coefficient=1.0):
        k = np.asarray(k, dtype=np.int64).reshape(1, -1)
        return cls(k, [coefficient])

    @classmethod
    def from_dict(cls, terms, dimension=None):
        """Build from ``{k_tuple: coefficient}``."""
        if not terms:
            return cls(np.zeros((0, dimension or 1), dtype=np.int64), [])
        ks = [tuple(k) for k in terms]
        return cls(np.array(ks, dtype=np.int64), [terms[k] for k in terms])

    @classmethod
    def random(cls, rng, dimension, n_terms, max_freq):
        """Random polynomial with ``n_terms`` distinct frequencies in ``[-max_freq, max_freq]^d``."""
        seen = set()
        while len(seen) < n_terms:
            seen.add(tuple(rng.integers(-max_freq, max_freq + 1, size=dimension).tolist()))
        ks = np.array(sorted(seen), dtype=np.int64)
        c = rng.standard_normal(n_terms) + 1j * rng.standard_normal(n_terms)
        return cls(ks, c)

    # properties -------------------------------------------------------
    @property
    def dimension(self):
        return self.frequencies.shape[1]

    def __len__(self):
        return self.coefficients.size

    def as_dict(self):
        return {tuple(k.tolist()): complex(c) for k, c in zip(self.frequencies, self.coefficients)}

    def l2_norm(self):
        return float(np.sqrt(np.sum(np.abs(self.coefficients) ** 2)))

    def sup_bound(self):
        """Upper bound for ``sup |f|`` (sum of coefficient moduli)."""
        return float(np.sum(np.abs(self.coefficients)))

    def is_constant(self):
        return bool(np.all(self.frequencies[np.abs(self.coefficients) > 0] == 0))

    # evaluation -------------------------------------------------------
    def __call__(self, x):
        """Evaluate at points ``x`` of shape ``(..., d)``; exact up to roundoff."""
        if isinstance(x, TorusPoint):
            x = x.coordinates
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dimension:
            raise ConfigurationError("point dimension does not match polynomial")
        if not len(self):
            return np.zeros(x.shape[:-1], dtype=complex)
        phase = np.exp(2j * np.pi * (x @ self.frequencies.T))
        return phase @ self.coefficients

    # algebra ----------------------------------------------------------
    def _like(self, other):
        if isinstance(other, TrigPolynomial) and other.dimension != self.dimension:
            raise ConfigurationError("polynomials live on tori of different dimension")

    def __add__(self, other):
        if not isinstance(other, TrigPolynomial):
            other = TrigPolynomial.constant(other, self.dimension)
        self._like(other)
        return TrigPolynomial(
            np.vstack([self.frequencies, other.frequencies]),
            np.concatenate([self.coefficients, other.coefficients]),
        )

    __radd__ = __add__

    def __neg__(self):
        return TrigPolynomial(self.frequencies, -self.coefficients)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, TrigPolynomial):
            return TrigPolynomial(self.frequencies, self.coefficients * other)
        self._like(other)
        k = (self.frequencies[:, None, :] + other.frequencies[None, :, :]).reshape(-1, self.dimension)
        c = np.outer(self.coefficients, other.coefficients).ravel()
        return TrigPolynomial(k, c)

    __rmul__ = __mul__

    def conj(self):
        """Complex conjugate: ``k -> -k`` and ``c -> conj(c)``."""
        return TrigPolynomial(-self.frequencies, np.conj(self.coefficients))

    def abs_squared(self):
        """The non-negative polynomial ``|f|^2``."""
        return self * self.conj()

    def simplify(self, tol=0.0):
        keep = np.abs(self.coefficients) > tol
        return TrigPolynomial(self.frequencies[keep], self.coefficients[keep])

    def coefficient_distance(self, other):
        """Max coefficientwise difference (missing terms count as zero)."""
        d = (self - other).coefficients
        return float(np.max(np.abs(d))) if d.size else 0.0

    # serialization ----------------------------------------------------
    def to_json(self):
        return json.dumps(
            [
                {"k": k.tolist(), "re": float(c.real), "im": float(c.imag)}
                for k, c in zip(self.frequencies, self.coefficients)
            ]
        )

    @classmethod
    def from_json(cls, data, dimension=None):
        if isinstance(data, str):
            data = json.loads(data)
        if not data:
            return cls(np.zeros((0, dimension or 1), dtype=np.int64), [])
        ks = np.array([term["k"] for term in data], dtype=np.int64)
        if ks.ndim != 2 or (dimension is not None and ks.shape[1] != dimension):
            raise ConfigurationError(f"frequency vectors must have length {dimension}")
        cs = [complex(term.get("re", 0.0), term.get("im", 0.0)) for term in data]
        return cls(ks, cs)


@dataclass(frozen=True)
class CoboundaryDecomposition:
    """``f = (g o S^delta - g) + h`` with ``h`` invariant under every ``S^t``."""

    invariant_part: TrigPolynomial
    transfer_part: TrigPolynomial
    delta: float

    def reconstruct(self, sys):
        g = self.transfer_part
        return koopman_apply(sys, g, self.delta, 0.0) - g + self.invariant_part


def _point(x):
    return x.coordinates if isinstance(x, TorusPoint) else np.asarray(x, dtype=float)


def flow_apply(sys, x, s, t):
    """``S^s T^t x``; ``s`` and ``t`` may be arrays (broadcast against each other)."""
    x = _point(x)
    if x.shape[-1] != sys.dimension:
        raise ConfigurationError("point dimension does not match flow")
    s = np.asarray(s, dtype=float)[..., None]
    t = np.asarray(t, dtype=float)[..., None]
    y = np.mod(x + s * sys.s_direction + t * sys.t_direction, 1.0)
    y[y >= 1.0] = 0.0
    if y.ndim == 1:
        return TorusPoint(y)
    return y


def koopman_apply(sys, f, s, t):
    """The composition ``f o S^s T^t`` (a phase on each coefficient)."""
    if f.dimension != sys.dimension:
        raise ConfigurationError(
            f"polynomial dimension {f.dimension} does not match flow dimension {sys.dimension}"
        )
    shift = s * sys.s_direction + t * sys.t_direction
    return TrigPolynomial(
        f.frequencies, f.coefficients * np.exp(2j * np.pi * (f.frequencies @ shift))
    )


def _speeds(sys, f):
    return f.frequencies @ sys.s_direction


def _transverse(sys, f):
    # k . s_dir == 0 up to roundoff in the dot product
    scale = np.abs(f.frequencies) @ np.abs(sys.s_direction)
    return np.abs(_speeds(sys, f)) <= 1e-12 * (1.0 + scale)


def coboundary_decompose(sys, f, delta, resonance_floor=1e-8):
    """Split ``f`` into an ``S``-invariant part and a coboundary for ``U^delta``.

    Frequencies with ``k . s_dir = 0`` go to the invariant part.  Every other
    frequency is divided by ``e(delta k . s_dir) - 1``; if that is below
    ``resonance_floor`` a :class:`ResonanceError` names the offending ``k``.
    """
    if not 0 < delta <= 1:
        raise DomainError(f"delta must lie in (0, 1], got {delta}")
    if f.dimension != sys.dimension:
        raise ConfigurationError("polynomial dimension does not match flow")
    inv = _transverse(sys, f)
    denom = np.exp(2j * np.pi * delta * _speeds(sys, f)) - 1.0
    bad = (~inv) & (np.abs(denom) < resonance_floor)
    if np.any(bad):
        k = tuple(f.frequencies[np.argmax(bad)].tolist())
        raise ResonanceError(
            f"frequency {k} is resonant for delta={delta}: "
            f"|e(delta k.s) - 1| < {resonance_floor}",
            frequency=k,
        )
    h = TrigPolynomial(f.frequencies[inv], f.coefficients[inv])
    g = TrigPolynomial(f.frequencies[~inv], f.coefficients[~inv] / denom[~inv])
    return CoboundaryDecomposition(h, g, float(delta))


def embed_transfer_function(sys, f, x, N, grid):
    """Sample ``F(u, v) = f(S^u T^v x) 1_[0,3N](u) 1_[0,2N^2](v)`` on ``grid``.

    The polynomial is evaluated exactly at each grid node; the grid must
    leave room for the shifts used later (periods >= 3N+4 and >= 2N^2+4).
    """
    if N < 1:
        raise ConfigurationError("transference needs N >= 1")
    if grid.period_u < 3 * N + 4 or grid.period_v < 2 * N * N + 4:
        raise ConfigurationError(
            f"grid {grid.period_u}x{grid.period_v} too small for N={N}: "
            f"need >= {3 * N + 4} x {2 * N * N + 4}"
        )
    U, V = grid.mesh()
    x0 = _point(x)
    pts = x0 + U[..., None] * sys.s_direction + V[..., None] * sys.t_direction
    mask = (U <= 3 * N) & (V <= 2 * N * N)
    return GridFunction2D(grid, np.where(mask, f(pts), 0.0))
