"""
Grids, discrete Fourier analysis, norms and 1-D quadrature.

Conventions
-----------
A :class:`Grid2D` samples the periodic box ``[0, P_u) x [0, P_v)`` at the
left endpoints ``u_j = j * h_u``.  Spectral coefficients are normalised so
that

    f(u, v) = sum_k c[k1, k2] * exp(2 pi i (k1 u / P_u + k2 v / P_v)),

i.e. ``c = fft2(samples) / (n_u * n_v)`` in numpy ordering.  Continuum
norms are approximated by Riemann sums with cell weight ``h_u * h_v``, which
makes Parseval exact at the discrete level.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import wofz

from .errors import ConfigurationError, ConvergenceError, DomainError

__all__ = [
    "Grid2D",
    "GridFunction2D",
    "Spectrum2D",
    "QuadratureRule",
    "FitResult",
    "dft_forward",
    "dft_inverse",
    "lp_norm",
    "weak_l1_norm",
    "integrate_1d",
    "chirp_integral",
    "fit_power_law",
    "shift_multiplier",
    "translate",
    "interpolate_tensor",
]


def _is_power_of_two(n):
    return isinstance(n, (int, np.integer)) and n >= 2 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid2D:
    """Uniform periodic grid on a ``period_u x period_v`` box."""

    period_u: float
    period_v: float
    n_u: int
    n_v: int

    def __post_init__(self):
        if not (self.period_u > 0 and self.period_v > 0):
            raise ConfigurationError("grid periods must be positive")
        if not (_is_power_of_two(self.n_u) and _is_power_of_two(self.n_v)):
            raise ConfigurationError(
                f"grid sizes must be powers of two >= 2, got {self.n_u}x{self.n_v}"
            )

    @property
    def h_u(self):
        return self.period_u / self.n_u

    @property
    def h_v(self):
        return self.period_v / self.n_v

    @property
    def shape(self):
        return (self.n_u, self.n_v)

    @property
    def cell_area(self):
        return self.h_u * self.h_v

    @property
    def u(self):
        return np.arange(self.n_u) * self.h_u

    @property
    def v(self):
        return np.arange(self.n_v) * self.h_v

    def mesh(self):
        """Return ``(U, V)`` coordinate arrays of shape ``(n_u, n_v)``."""
        return np.meshgrid(self.u, self.v, indexing="ij")

    @property
    def xi_u(self):
        """Physical frequencies along u, numpy FFT ordering."""
        return np.fft.fftfreq(self.n_u, d=self.h_u)

    @property
    def xi_v(self):
        return np.fft.fftfreq(self.n_v, d=self.h_v)

    def to_dict(self):
        return {
            "period_u": self.period_u,
            "period_v": self.period_v,
            "n_u": self.n_u,
            "n_v": self.n_v,
        }


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GridFunction2D:
    """Complex samples of a function on a :class:`Grid2D`."""

    grid: Grid2D
    samples: np.ndarray

    def __post_init__(self):
        s = _frozen(self.samples)
        if s.shape != self.grid.shape:
            raise ConfigurationError(
                f"samples have shape {s.shape}, grid expects {self.grid.shape}"
            )
        if not np.all(np.isfinite(s)):
            raise DomainError("grid function samples must be finite")
        object.__setattr__(self, "samples", s)

    @classmethod
    def from_callable(cls, grid, fn):
        """Sample ``fn(U, V)`` on the grid mesh."""
        U, V = grid.mesh()
        return cls(grid, np.broadcast_to(fn(U, V), grid.shape))

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.shape, dtype=complex))

    def _check(self, other):
        if other.grid != self.grid:
            raise ConfigurationError("grid functions live on different grids")

    def __add__(self, other):
        self._check(other)
        return GridFunction2D(self.grid, self.samples + other.samples)

    def __sub__(self, other):
        self._check(other)
        return GridFunction2D(self.grid, self.samples - other.samples)

    def __mul__(self, scalar):
        return GridFunction2D(self.grid, self.samples * scalar)

    __rmul__ = __mul__

    def l2_norm(self):
        return lp_norm(self, 2)

    def to_bytes(self):
        """Flat snapshot: ``<q n_u, <q n_v, <d period_u, <d period_v``, then
        row-major little-endian ``(re, im)`` float64 pairs."""
        g = self.grid
        head = np.array([g.n_u, g.n_v], dtype="<i8").tobytes()
        head += np.array([g.period_u, g.period_v], dtype="<f8").tobytes()
        return head + np.ascontiguousarray(self.samples).astype("<c16").tobytes()

    @classmethod
    def from_bytes(cls, data):
        if len(data) < 32:
            raise ConfigurationError("snapshot shorter than its header")
        n_u, n_v = (int(k) for k in np.frombuffer(data[:16], dtype="<i8"))
        pu, pv = (float(p) for p in np.frombuffer(data[16:32], dtype="<f8"))
        grid = Grid2D(pu, pv, n_u, n_v)
        body = data[32:]
        if len(body) != 16 * n_u * n_v:
            raise ConfigurationError(f"snapshot body has {len(body)} bytes, expected {16 * n_u * n_v}")
        return cls(grid, np.frombuffer(body, dtype="<c16").reshape(n_u, n_v))


@dataclass(frozen=True, eq=False)
class Spectrum2D:
    """Fourier coefficients of a :class:`GridFunction2D` (numpy ordering).

    ``coefficients[i, j]`` belongs to integer indices
    ``(fftfreq(n_u)[i] * n_u, fftfreq(n_v)[j] * n_v)`` and physical
    frequencies ``(grid.xi_u[i], grid.xi_v[j])``.
    """

    grid: Grid2D
    coefficients: np.ndarray

    def __post_init__(self):
        c = _frozen(self.coefficients)
        if c.shape != self.grid.shape:
            raise ConfigurationError("coefficient array does not match grid")
        object.__setattr__(self, "coefficients", c)

    def coefficient(self, k1, k2):
        """Coefficient at integer frequency indices ``(k1, k2)``."""
        return self.coefficients[k1 % self.grid.n_u, k2 % self.grid.n_v]

    def l2_norm(self):
        g = self.grid
        return float(np.sqrt(g.period_u * g.period_v * np.sum(np.abs(self.coefficients) ** 2)))

    def frequency_mesh(self):
        return np.meshgrid(self.grid.xi_u, self.grid.xi_v, indexing="ij")


def dft_forward(f):
    """Spectrum of ``f`` with the trigonometric-interpolant normalisation."""
    g = f.grid
    return Spectrum2D(g, np.fft.fft2(f.samples) / (g.n_u * g.n_v))


def dft_inverse(s):
    g = s.grid
    return GridFunction2D(g, np.fft.ifft2(s.coefficients) * (g.n_u * g.n_v))


def lp_norm(f, p):
    """Riemann-sum L^p norm of a grid function; ``p = np.inf`` gives the max."""
    if not p >= 1:
        raise DomainError(f"L^p norm needs p >= 1, got {p}")
    a = np.abs(f.samples)
    if np.isinf(p):
        return float(a.max())
    return float((f.grid.cell_area * np.sum(a**p)) ** (1.0 / p))


def weak_l1_norm(values, weights=None):
    """Weak-L^1 quasi-norm of a finite sample with point masses.

    Computes ``sup_a a * mass{|v| > a}`` exactly.  The supremum is approached
    as ``a`` increases to one of the sample moduli ``m``, where the level set
    is ``{|v| >= m}``, so it suffices to scan the sorted moduli.

    Parameters
    ----------
    values : array_like
        Sample values (complex allowed).
    weights : array_like, optional
        Non-negative masses; defaults to ``1/n`` each.
    """
    a = np.abs(np.asarray(values, dtype=complex).ravel())
    if a.size == 0:
        return 0.0
    if weights is None:
        w = np.full(a.size, 1.0 / a.size)
    else:
        w = np.asarray(weights, dtype=float).ravel()
        if w.shape != a.shape:
            raise ConfigurationError("weights must match values")
        if np.any(w < 0):
            raise DomainError("weights must be non-negative")
    order = np.argsort(a, kind="stable")
    a, w = a[order], w[order]
    tail = np.cumsum(w[::-1])[::-1]
    first = np.searchsorted(a, a, side="left")
    return float(np.max(a * tail[first]))


@dataclass(frozen=True)
class QuadratureRule:
    """Composite Gauss-Legendre rule with a panel-doubling convergence test.

    ``panels`` is the starting panel count per sub-interval; it is doubled
    until two successive results differ by less than ``rel_tol`` times the
    integral of ``|f|``, or ``max_panels`` is exceeded.
    """

    kind: str = "composite-gauss-legendre"
    panels: int = 4
    nodes_per_panel: int = 8
    rel_tol: float = 1e-8
    max_panels: int = 2**20

    def __post_init__(self):
        if self.kind != "composite-gauss-legendre":
            raise ConfigurationError(f"unsupported quadrature kind {self.kind!r}")
        if self.panels < 1 or self.nodes_per_panel < 1:
            raise ConfigurationError("panels and nodes_per_panel must be positive")
        if not self.rel_tol > 0:
            raise ConfigurationError("rel_tol must be positive")

    def to_dict(self):
        return {
            "kind": self.kind,
            "panels": self.panels,
            "nodes_per_panel": self.nodes_per_panel,
            "rel_tol": self.rel_tol,
            "max_panels": self.max_panels,
        }


DEFAULT_RULE = QuadratureRule()

_LEGGAUSS = {}


def _leggauss(m):
    if m not in _LEGGAUSS:
        _LEGGAUSS[m] = np.polynomial.legendre.leggauss(m)
    return _LEGGAUSS[m]


def _composite(f, lo, hi, panels, m, max_nodes):
    x, w = _leggauss(m)
    width = (hi - lo) / panels
    step = max(1, max_nodes // m)
    total = 0.0
    total_abs = 0.0
    for start in range(0, panels, step):
        idx = np.arange(start, min(panels, start + step))
        t = lo + width * (idx[:, None] + 0.5 * (x[None, :] + 1.0))
        vals = np.asarray(f(t.ravel()))
        wt = np.tile(w, idx.size) * (0.5 * width)
        total = total + np.tensordot(wt, vals, axes=(0, 0))
        total_abs = total_abs + np.tensordot(wt, np.abs(vals), axes=(0, 0))
    return total, total_abs


def integrate_1d(f, a, b, rule=None, points=None, max_nodes=2**16, abs_tol=0.0):
    """Integrate ``f`` over ``[a, b]`` with a converged composite Gauss rule.

    ``f`` receives a 1-D array of nodes and returns an array whose leading
    axis matches it; trailing axes are integrated independently (useful for
    whole fields).  ``points`` are interior breakpoints where the integrand
    is not smooth; every sub-interval is converged separately.  A piece
    counts as converged once its change is below ``rel_tol`` times its
    absolute integral, plus ``abs_tol`` and a roundoff floor tied to the
    whole integral.

    Raises
    ------
    ConvergenceError
        If the panel cap is hit; ``previous`` and ``last`` hold the last two
        iterates.
    """
    rule = rule or DEFAULT_RULE
    if b < a:
        raise DomainError("integrate_1d needs a <= b")
    if a == b:
        return 0.0 + 0.0j
    cuts = [a]
    if points is not None:
        cuts += sorted(p for p in np.ravel(points) if a < p < b)
    cuts.append(b)
    spans = [(lo, hi) for lo, hi in zip(cuts[:-1], cuts[1:]) if hi > lo]
    first = [_composite(f, lo, hi, rule.panels, rule.nodes_per_panel, max_nodes) for lo, hi in spans]
    # roundoff floor: pieces that are negligible against the whole integral
    floor = abs_tol + 64 * np.finfo(float).eps * float(np.max(sum(a for _, a in first)))
    result = 0.0
    for (lo, hi), (prev, _) in zip(spans, first):
        panels = rule.panels
        while True:
            panels *= 2
            cur, cur_abs = _composite(f, lo, hi, panels, rule.nodes_per_panel, max_nodes)
            err = np.max(np.abs(cur - prev))
            ref = np.max(cur_abs)
            if err <= rule.rel_tol * ref + floor:
                break
            if panels >= rule.max_panels:
                raise ConvergenceError(
                    f"no convergence on [{lo}, {hi}] with {panels} panels "
                    f"(change {err:.3e}, scale {ref:.3e})",
                    previous=prev,
                    last=cur,
                    panels=panels,
                )
            prev = cur
        result = result + cur
    return result


def _chirp_upper(alpha, beta, t0, t1):
    # beta > 0 throughout; z = c * s with c = sqrt(2 pi beta) e^{-i pi/4}
    c = np.sqrt(2.0 * np.pi * beta) * np.exp(-0.25j * np.pi)
    vertex = alpha / (2.0 * beta)
    s0, s1 = t0 + vertex, t1 + vertex
    z0, z1 = c * s0, c * s1
    e0 = np.exp(2j * np.pi * (alpha * t0 + beta * t0 * t0))
    e1 = np.exp(2j * np.pi * (alpha * t1 + beta * t1 * t1))
    pref = np.sqrt(np.pi) / (2.0 * c)
    out = np.empty(z0.shape, dtype=complex)
    # wofz is only evaluated in the closed upper half-plane, where it is bounded
    r = s0 >= 0
    out[r] = pref[r] * (e0[r] * wofz(1j * z0[r]) - e1[r] * wofz(1j * z1[r]))
    lft = (s1 <= 0) & ~r
    out[lft] = pref[lft] * (e1[lft] * wofz(-1j * z1[lft]) - e0[lft] * wofz(-1j * z0[lft]))
    m = ~(r | lft)
    out[m] = pref[m] * (
        2.0 * np.exp(-1j * np.pi * alpha[m] * vertex[m])
        - e1[m] * wofz(1j * z1[m])
        - e0[m] * wofz(-1j * z0[m])
    )
    return out


def chirp_integral(alpha, beta, t0, t1):
    """Closed form of ``int_{t0}^{t1} exp(2 pi i (alpha t + beta t^2)) dt``.

    Vectorised over broadcastable arguments.  Uses the Faddeeva function so
    that neither endpoint suffers from cancellation between ``erf`` values
    close to one; the stationary point ``-alpha / (2 beta)`` decides which
    representation is used.
    """
    alpha, beta, t0, t1 = np.broadcast_arrays(
        *(np.asarray(z, dtype=float) for z in (alpha, beta, t0, t1))
    )
    out = np.zeros(alpha.shape, dtype=complex)

    lin = beta == 0
    if np.any(lin):
        al, a0, a1 = alpha[lin], t0[lin], t1[lin]
        small = np.abs(al) * np.maximum(np.abs(a0), np.abs(a1)) < 1e-300
        safe = np.where(small, 1.0, al)
        val = np.exp(2j * np.pi * safe * a0) * np.expm1(2j * np.pi * safe * (a1 - a0)) / (
            2j * np.pi * safe
        )
        out[lin] = np.where(small, a1 - a0, val)

    pos = beta > 0
    if np.any(pos):
        out[pos] = _chirp_upper(alpha[pos], beta[pos], t0[pos], t1[pos])
    neg = beta < 0
    if np.any(neg):
        out[neg] = np.conj(_chirp_upper(-alpha[neg], -beta[neg], t0[neg], t1[neg]))
    return out if out.ndim else complex(out)


@dataclass(frozen=True)
class FitResult:
    """Least-squares power law ``y ~ prefactor * x**exponent``."""

    exponent: float
    prefactor: float
    r_squared: float
    points_used: int
    residuals: tuple = field(default=(), repr=False)

    def to_dict(self):
        return {
            "exponent": self.exponent,
            "prefactor": self.prefactor,
            "r_squared": self.r_squared,
            "points_used": self.points_used,
        }


def fit_power_law(x, y=None):
    """Fit a line to ``(log x, log y)`` by unweighted least squares.

    Accepts either two arrays or a single sequence of ``(x, y)`` pairs.
    """
    if y is None:
        pairs = np.asarray(list(x), dtype=float)
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            raise DomainError("expected a sequence of (x, y) pairs")
        x, y = pairs[:, 0], pairs[:, 1]
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise DomainError("x and y must have equal length")
    if x.size < 3:
        raise DomainError("a power-law fit needs at least 3 points")
    if np.any(x <= 0) or np.any(y <= 0) or not np.all(np.isfinite(x * y)):
        raise DomainError("power-law fit needs finite, strictly positive data")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    if ss_tot <= 1e-28 * max(1.0, float(np.sum(ly**2))):
        r2 = 1.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return FitResult(float(slope), float(np.exp(intercept)), r2, int(x.size), tuple(resid))


def shift_multiplier(xi, period, n, s):
    """Spectral multiplier realising ``f(. + s)`` on one axis.

    The Nyquist mode is treated as a cosine so real data stay real.
    """
    m = np.exp(2j * np.pi * np.multiply.outer(s, xi))
    if n % 2 == 0:
        nyq = n // 2
        m[..., nyq] = np.cos(2 * np.pi * np.asarray(s) * abs(xi[nyq]))
    return m


def translate(f, du=0.0, dv=0.0):
    """Return the trigonometric interpolant of ``f`` shifted: ``f(u+du, v+dv)``."""
    g = f.grid
    coeffs = np.fft.fft2(f.samples)
    if du:
        coeffs = coeffs * shift_multiplier(g.xi_u, g.period_u, g.n_u, du)[:, None]
    if dv:
        coeffs = coeffs * shift_multiplier(g.xi_v, g.period_v, g.n_v, dv)[None, :]
    return GridFunction2D(g, np.fft.ifft2(coeffs))


def _eval_matrix(xi, n, pts):
    E = np.exp(2j * np.pi * np.multiply.outer(pts, xi))
    if n % 2 == 0:
        E[:, n // 2] = np.cos(2 * np.pi * pts * abs(xi[n // 2]))
    return E


def interpolate_tensor(f, u_pts, v_pts):
    """Evaluate the trigonometric interpolant of ``f`` on a tensor product of points."""
    g = f.grid
    c = dft_forward(f).coefficients
    Eu = _eval_matrix(g.xi_u, g.n_u, np.asarray(u_pts, dtype=float))
    Ev = _eval_matrix(g.xi_v, g.n_v, np.asarray(v_pts, dtype=float))
    return Eu @ c @ Ev.T
