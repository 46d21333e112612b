"""
Sweeps over delta and lambda, and the random families they run on.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import spearmanr

from ..errors import DomainError
from ..numerics import Spectrum2D, dft_forward, dft_inverse, fit_power_law, lp_norm
from .cutoffs import build_cutoffs
from .operators import apply_B_delta, apply_local_operator, band_split

__all__ = [
    "sparse_band_function",
    "band_limited_family",
    "excluded_band_family",
    "ProbeResult",
    "DecayReport",
    "local_estimate_probe",
    "decay_point",
    "assemble_decay_report",
    "delta_decay_experiment",
]


def _index_range(grid_n, period, lo, hi):
    # integer indices k with lo <= k / period <= hi, below Nyquist
    kmin = math.ceil(lo * period - 1e-9)
    kmax = math.floor(hi * period + 1e-9)
    nyq = grid_n // 2
    return [k for k in range(kmin, kmax + 1) if -nyq < k < nyq]


def sparse_band_function(grid, rng, n_modes, xi_u_band, xi_v_band, symmetric_u=True):
    """Unit-norm grid function with a few random modes in the given bands.

    ``xi_u_band = (lo, hi)`` selects ``lo <= |xi_u| <= hi`` (both signs when
    ``symmetric_u``); likewise ``xi_v_band`` for ``|xi_v|``.
    """
    ku = _index_range(grid.n_u, grid.period_u, *xi_u_band)
    kv = _index_range(grid.n_v, grid.period_v, *xi_v_band)
    if symmetric_u:
        ku = sorted(set(ku) | {-k for k in ku})
    kv = sorted(set(kv) | {-k for k in kv})
    if not ku or not kv:
        raise DomainError("frequency band contains no grid frequencies")
    c = np.zeros(grid.shape, dtype=complex)
    for _ in range(n_modes):
        i, j = rng.choice(ku), rng.choice(kv)
        c[i % grid.n_u, j % grid.n_v] += rng.standard_normal() + 1j * rng.standard_normal()
    F = dft_inverse(Spectrum2D(grid, c))
    return F * (1.0 / lp_norm(F, 2))


def band_limited_family(grid, rng, size, max_xi_u, max_xi_v, n_modes=6):
    """Pairs ``(F1, F2)`` with all frequencies inside the given box."""
    return [
        (
            sparse_band_function(grid, rng, n_modes, (0, max_xi_u), (0, max_xi_v)),
            sparse_band_function(grid, rng, n_modes, (0, max_xi_u), (0, max_xi_v)),
        )
        for _ in range(size)
    ]


def excluded_band_family(grid, rng, lam, size, axis=0, width=0.25, other_max=1.0, n_modes=4):
    """Functions whose spectrum vanishes for ``|xi_axis| < lam``.

    Frequencies along ``axis`` are drawn from ``[lam, (1 + width) lam]``
    (both signs), the other axis from ``|xi| <= other_max``.
    """
    band = (lam, (1 + width) * lam)
    rest = (0.0, other_max)
    members = []
    for _ in range(size):
        if axis == 0:
            members.append(sparse_band_function(grid, rng, n_modes, band, rest))
        else:
            members.append(sparse_band_function(grid, rng, n_modes, rest, band))
    return members


def _check_exclusion(F, lam, axis, tol=1e-10):
    g = F.grid
    c = dft_forward(F).coefficients
    xi = np.abs(g.xi_u)[:, None] if axis == 0 else np.abs(g.xi_v)[None, :]
    inside = np.broadcast_to(xi < lam, c.shape)
    total = np.sum(np.abs(c) ** 2)
    if total > 0 and np.sum(np.abs(c[inside]) ** 2) > tol**2 * total:
        raise DomainError(f"family member has spectrum inside |xi_{axis + 1}| < {lam}")


@dataclass
class ProbeResult:
    lambdas: list
    values: list
    member_values: list
    fit: object
    spearman: float
    j: int

    def to_rows(self):
        rows = []
        for lam, val in zip(self.lambdas, self.values):
            row = {"parameter": lam, "norm_total": val}
            if self.fit is not None:
                row.update(
                    fit_exponent=self.fit.exponent,
                    fit_prefactor=self.fit.prefactor,
                    fit_r2=self.fit.r_squared,
                )
            row["spearman"] = self.spearman
            rows.append(row)
        return rows


def local_estimate_probe(family, partner, cutoff, lambdas, j=1, kappa=2.0, rule=None):
    """L^1 size of the single-copy operator under a frequency exclusion.

    Parameters
    ----------
    family : callable
        ``family(lam)`` returns the grid functions whose spectrum vanishes
        for ``|xi_j| < lam``; they fill slot ``j`` of the operator.
    partner : GridFunction2D
        The fixed function in the other slot.
    lambdas : sequence of float
        Increasing exclusion radii (at least two).

    Returns
    -------
    ProbeResult
        Family means of ``||L(F1, F2)||_1 / (||F1||_2 ||F2||_2)``, a power
        law fit over the positive radii and the Spearman rank correlation
        between radius and value.
    """
    lambdas = [float(lam) for lam in lambdas]
    if len(lambdas) < 2 or any(b <= a for a, b in zip(lambdas, lambdas[1:])):
        raise DomainError("lambda list must be increasing with at least two values")
    if j not in (1, 2):
        raise DomainError("j must be 1 or 2")
    values, members = [], []
    pn = lp_norm(partner, 2)
    for lam in lambdas:
        fam = list(family(lam))
        if not fam:
            raise DomainError("empty family")
        vals = []
        for F in fam:
            _check_exclusion(F, lam, j - 1)
            F1, F2 = (F, partner) if j == 1 else (partner, F)
            out = apply_local_operator(F1, F2, cutoff, kappa, rule)
            vals.append(lp_norm(out, 1) / (lp_norm(F, 2) * pn))
        members.append(vals)
        values.append(float(np.mean(vals)))
    pos = [(lam, v) for lam, v in zip(lambdas, values) if lam > 0 and v > 0]
    fit = fit_power_law(*zip(*pos)) if len(pos) >= 3 else None
    rho = float(spearmanr(lambdas, values).statistic)
    return ProbeResult(lambdas, values, members, fit, rho, j)


@dataclass
class DecayReport:
    deltas: list
    radii: list
    norm_low: list
    norm_high: list
    norm_total: list
    triangle: list
    fit: object = None
    low_fit: object = None
    notes: list = field(default_factory=list)

    def to_rows(self):
        rows = []
        for i, d in enumerate(self.deltas):
            row = {
                "parameter": d,
                "R": self.radii[i],
                "norm_low": self.norm_low[i],
                "norm_high": self.norm_high[i],
                "norm_total": self.norm_total[i],
                "holds": self.triangle[i],
            }
            for name, fit in (("fit", self.fit), ("low_fit", self.low_fit)):
                row[f"{name}_exponent"] = fit.exponent if fit else float("nan")
                row[f"{name}_r2"] = fit.r_squared if fit else float("nan")
            rows.append(row)
        return rows


def _radius(R_rule, delta):
    if R_rule == "sqrt":
        return delta**-0.5
    R = float(R_rule)
    if R < 0:
        raise DomainError("fixed band radius must be non-negative")
    return R


def decay_point(pairs, delta, R_rule="sqrt", cutoff_builder=build_cutoffs, kappa=2.0, rule=None):
    """One sweep point: family means of the low, high and total ``B_delta`` norms.

    Returns ``(R, low, high, total, triangle_ok)``; norms are divided by
    ``||F1||_2 ||F2||_2`` member by member before averaging.
    """
    if not 0 < delta <= 1:
        raise DomainError(f"delta={delta} outside (0, 1]; larger delta is trivial")
    pairs = list(pairs)
    if not pairs:
        raise DomainError("empty family")
    cut = cutoff_builder(delta)
    R = _radius(R_rule, delta)
    lows, highs, totals = [], [], []
    for F1, F2 in pairs:
        scale = lp_norm(F1, 2) * lp_norm(F2, 2)
        split = band_split(F1, R)
        lo = lp_norm(apply_B_delta(split.low, F2, cut, delta, kappa, rule), 1)
        hi = 0.0
        if np.any(split.high.samples != 0):
            hi = lp_norm(apply_B_delta(split.high, F2, cut, delta, kappa, rule), 1)
        tot = lp_norm(apply_B_delta(F1, F2, cut, delta, kappa, rule), 1)
        lows.append(lo / scale)
        highs.append(hi / scale)
        totals.append(tot / scale)
    ok = all(t <= a + b + 1e-8 for t, a, b in zip(totals, lows, highs))
    return R, float(np.mean(lows)), float(np.mean(highs)), float(np.mean(totals)), bool(ok)


def assemble_decay_report(deltas, points):
    """Collect ``decay_point`` outputs into a report and fit both series."""
    rep = DecayReport(list(deltas), *[list(col) for col in zip(*points)])
    for attr, series in (("fit", rep.norm_total), ("low_fit", rep.norm_low)):
        try:
            setattr(rep, attr, fit_power_law(rep.deltas, series))
        except DomainError as exc:
            rep.notes.append(f"{attr}: {exc}")
    return rep


def delta_decay_experiment(pairs, deltas, R_rule="sqrt", cutoff_builder=build_cutoffs,
                           kappa=2.0, rule=None):
    """Sweep ``delta``, splitting ``F1`` at ``R`` and measuring ``B_delta``.

    For each ``delta`` the cutoffs are rebuilt, ``F1`` is split at
    ``R = delta**-0.5`` (``R_rule="sqrt"``) or at a fixed radius, and the
    family means of ``||B(F1_low, F2)||_1``, ``||B(F1_high, F2)||_1`` and
    ``||B(F1, F2)||_1`` (each over ``||F1||_2 ||F2||_2``) are recorded.
    Power laws are fitted to the total and to the low-band part; a
    degenerate fit is noted in the report rather than raised.
    """
    deltas = [float(d) for d in deltas]
    if len(deltas) < 4:
        raise DomainError("delta sweep needs at least 4 values")
    for d in deltas:
        if not 0 < d <= 1:
            raise DomainError(f"delta={d} outside (0, 1]; larger delta is trivial")
    pairs = list(pairs)
    points = [decay_point(pairs, d, R_rule, cutoff_builder, kappa, rule) for d in deltas]
    return assemble_decay_report(deltas, points)
