"""
Experiment orchestration.

Every experiment is cut into independent work units.  A unit re-reads the
config, draws its randomness from its own counter-based stream and returns
rows; the parent sorts rows by ``(unit, position)`` before writing, so the
CSV bytes depend only on the config and seed, never on the worker count.
"""

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import __version__
from ..averages import (
    AverageRequest,
    ExponentPair,
    LacunarySchedule,
    compute_average,
    lacunary_trajectory,
    maximal_chain_check,
    sample_points,
    sandwich_check,
    single_quadratic_average,
)
from ..bilinear.cutoffs import build_cutoffs
from ..bilinear.experiments import (
    assemble_decay_report,
    band_limited_family,
    decay_point,
    excluded_band_family,
    local_estimate_probe,
    sparse_band_function,
)
from ..bilinear.operators import apply_B_delta, apply_local_operator
from ..bilinear.oracles import brute_force_B_delta, brute_force_local_operator
from ..bilinear.transference import transfer_norm_accounting, transference_check
from ..dynamics import TrigPolynomial
from ..errors import ConfigurationError, DomainError
from ..numerics import DEFAULT_RULE, Grid2D, QuadratureRule, fit_power_law, lp_norm
from .config import parse_config, rng_for

__all__ = ["RunOutcome", "plan_units", "execute_unit", "run_experiment", "rows_to_csv", "worker_count"]

# fixed stream numbers so that adding units never shifts other draws
_POINT_STREAM = 1
_FAMILY_STREAM = 2
_OBSERVABLE_STREAMS = {"f1": 101, "f2": 102}
_UNIT_STREAM_BASE = 1000


def worker_count():
    raw = os.environ.get("BILERG_WORKERS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigurationError(f"BILERG_WORKERS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigurationError("BILERG_WORKERS must be at least 1")
    return n


@dataclass
class RunOutcome:
    kind: str
    rows: list
    csv_path: Path
    manifest_path: Path
    violations: list


def _grid(spec, default):
    spec = {**default, **(spec or {})}
    try:
        return Grid2D(float(spec["period_u"]), float(spec["period_v"]), int(spec["n_u"]), int(spec["n_v"]))
    except (KeyError, TypeError) as exc:
        raise ConfigurationError(f"bad grid spec {spec!r}") from exc


def _obs(cfg, name):
    return cfg.observable(name, _OBSERVABLE_STREAMS.get(name, 100))


def _points(cfg):
    p = cfg.params
    d = cfg.system.dimension
    if "x" in p:
        X = np.atleast_2d(np.asarray(p["x"], dtype=float))
        if X.shape[1] != d:
            raise ConfigurationError("x does not match the system dimension")
        return X
    return sample_points(rng_for(cfg.seed, _POINT_STREAM), int(p.get("n_points", 1)), d)


def _chunks(n, size):
    return [(s, min(n, s + size)) for s in range(0, n, size)]


def _rule(p):
    r = p.get("rule")
    return QuadratureRule(**r) if r else DEFAULT_RULE


# ---- unit planning -----------------------------------------------------------


def plan_units(cfg):
    """Unit descriptors (plain JSON-able dicts) for a parsed config."""
    p = cfg.params
    kind = cfg.kind
    if kind in ("average-trajectory", "sandwich", "maximal-chain"):
        n = len(_points(cfg))
        return [{"lo": lo, "hi": hi} for lo, hi in _chunks(n, int(p.get("chunk", 25)))]
    if kind == "single-quadratic":
        return [{"N": float(N)} for N in p.get("Ns", [2.0**k for k in range(4, 15)])]
    if kind == "delta-decay":
        deltas = p.get("deltas", [2.0**-k for k in range(1, 9)])
        if len(deltas) < 4:
            raise ConfigurationError("delta-decay needs at least 4 deltas")
        return [{"delta": float(d)} for d in deltas]
    if kind == "lambda-probe":
        return [{"family": i} for i in range(int(p.get("families", 5)))]
    if kind == "transference":
        return [{"part": "inequality"}, {"part": "norm", "name": "f1"}, {"part": "norm", "name": "f2"}]
    if kind == "oracle-xcheck":
        return [{"instance": i} for i in range(int(p.get("n_instances", 10)))]
    raise ConfigurationError(f"no planner for kind {kind!r}")


# ---- unit execution ----------------------------------------------------------


def _unit_trajectory(cfg, unit):
    p = cfg.params
    f1, f2 = _obs(cfg, "f1"), _obs(cfg, "f2")
    sched = LacunarySchedule(float(p.get("alpha", 2.0)), int(p.get("n_max", 10)))
    X = _points(cfg)[unit["lo"] : unit["hi"]]
    rows = []
    for i, x in enumerate(X, start=unit["lo"]):
        rec = lacunary_trajectory(cfg.system, f1, f2, x, sched, float(p.get("kappa", 2.0)), _rule(p))
        lim = rec.limit_estimate
        for n, r in enumerate(rec.to_rows()):
            rows.append({
                "point": i, "n": n, "parameter": r["scale"], "re": r["re"], "im": r["im"], "value": r["abs"],
                "residual": rec.cauchy_residual,
                "limit_re": lim.real if lim is not None else math.nan,
                "limit_im": lim.imag if lim is not None else math.nan,
            })
    return rows


def _unit_sandwich(cfg, unit):
    p = cfg.params
    f1, f2 = _obs(cfg, "f1"), _obs(cfg, "f2")
    alpha = float(p.get("alpha", 2.0))
    X = _points(cfg)[unit["lo"] : unit["hi"]]
    rows = []
    for i, x in enumerate(X, start=unit["lo"]):
        for N in p.get("Ns", [1.5, 3.0, 10.0]):
            r = sandwich_check(cfg.system, f1, f2, x, alpha, float(N), float(p.get("kappa", 2.0)), _rule(p))
            rows.append({"point": i, "parameter": float(N), "lower": r.lower, "middle": r.middle,
                         "upper": r.upper, "holds": r.holds})
    return rows


def _unit_maximal(cfg, unit):
    p = cfg.params
    f1, f2 = _obs(cfg, "f1"), _obs(cfg, "f2")
    pexp = float(p.get("p", 2.0))
    exps = ExponentPair(pexp, float(p["q"])) if "q" in p else ExponentPair.dual(pexp)
    X = _points(cfg)[unit["lo"] : unit["hi"]]
    N = float(p.get("N", 8.0))
    r = maximal_chain_check(cfg.system, f1, f2, X, N, exps, p.get("m_max"), _rule(p),
                            tol=float(p.get("tol", 1e-6)))
    return [
        {"point": unit["lo"] + i, "parameter": N, "p": exps.p, "q": exps.q, "lhs": float(r.lhs[i]),
         "rhs": float(r.rhs[i]), "m_max": r.m_max, "holds": bool(r.holds[i])}
        for i in range(len(X))
    ]


def _unit_single(cfg, unit):
    p = cfg.params
    f2 = _obs(cfg, "f2")
    x = np.asarray(p.get("x", [0.0] * cfg.system.dimension), dtype=float)
    N = unit["N"]
    v = single_quadratic_average(cfg.system, f2, x, N, float(p.get("kappa", 2.0)), _rule(p),
                                 p.get("method", "auto"))
    return [{"parameter": N, "re": v.real, "im": v.imag, "value": abs(v)}]


def _decay_family(cfg):
    p = cfg.params
    fam = p.get("family", {})
    grid = _grid(p.get("grid"), {"period_u": 8, "period_v": 8, "n_u": 64, "n_v": 64})
    rng = rng_for(cfg.seed, _FAMILY_STREAM)
    return band_limited_family(grid, rng, int(fam.get("size", 10)), float(fam.get("max_xi_u", 3.0)),
                               float(fam.get("max_xi_v", 3.0)), int(fam.get("n_modes", 6)))


def _unit_decay(cfg, unit):
    p = cfg.params
    R_rule = p.get("R", "sqrt")
    R, lo, hi, tot, ok = decay_point(_decay_family(cfg), unit["delta"], R_rule,
                                     kappa=float(p.get("kappa", 2.0)))
    return [{"parameter": unit["delta"], "R": R, "norm_low": lo, "norm_high": hi, "norm_total": tot, "holds": ok}]


def _probe_grid(p, j):
    default = {"period_u": 4, "period_v": 8, "n_u": 1024, "n_v": 64} if j == 1 else \
        {"period_u": 4, "period_v": 6, "n_u": 64, "n_v": 1024}
    return _grid(p.get("grid"), default)


def _unit_probe(cfg, unit):
    p = cfg.params
    j = int(p.get("j", 1))
    grid = _probe_grid(p, j)
    rng = rng_for(cfg.seed, _UNIT_STREAM_BASE + unit["family"])
    partner_band = float(p.get("partner_band", 1.0))
    partner = sparse_band_function(grid, rng, int(p.get("n_modes", 4)), (0, partner_band), (0, partner_band))
    size = int(p.get("family_size", 3))
    width = float(p.get("width", 0.25))

    def family(lam):
        return excluded_band_family(grid, rng, lam, size, axis=j - 1, width=width,
                                    other_max=partner_band, n_modes=int(p.get("n_modes", 4)))

    lambdas = p.get("lambdas", [4, 8, 16, 32, 64])
    res = local_estimate_probe(family, partner, build_cutoffs(float(p.get("cutoff_delta", 1.0))), lambdas, j,
                               float(p.get("kappa", 2.0)))
    rows = []
    for r in res.to_rows():
        rows.append({"family": unit["family"], "j": j, **r})
    return rows


def _unit_transference(cfg, unit):
    p = cfg.params
    N = float(p.get("N", 2.0))
    grid = _grid(p.get("grid"), {"period_u": 3 * N + 4, "period_v": 2 * N * N + 4, "n_u": 512, "n_v": 1024})
    X = _points(cfg)
    if unit["part"] == "inequality":
        r = transference_check(cfg.system, _obs(cfg, "f1"), _obs(cfg, "f2"), X, N,
                               float(p.get("delta", 0.5)), grid)
        return [{"check": "inequality", "parameter": N, "lhs": r.ergodic_lhs, "rhs": r.transfer_rhs,
                 "lhs_se": r.lhs_se, "rhs_se": r.rhs_se, "quadrature_tol": r.quadrature_tol, "holds": r.holds}]
    f = _obs(cfg, unit["name"])
    n_norm = int(p.get("n_norm_points", min(len(X), 20)))
    acc = transfer_norm_accounting(cfg.system, f, X[:n_norm], N, grid)
    return [{"check": f"norm_{unit['name']}", "parameter": N, "lhs": acc.mean_norm_sq, "rhs": acc.expected,
             "lhs_se": acc.se, "rel_error": acc.rel_error,
             "holds": bool(acc.rel_error <= float(p.get("norm_tol", 0.02)))}]


def _unit_xcheck(cfg, unit):
    p = cfg.params
    target = p.get("target", "B_delta")
    rng = rng_for(cfg.seed, _UNIT_STREAM_BASE + unit["instance"])
    kappa = float(p.get("kappa", 2.0))
    if target == "average":
        d = cfg.system.dimension
        f1 = _random_poly(rng, d, p)
        f2 = _random_poly(rng, d, p)
        x = rng.random(d)
        N = float(rng.uniform(1.0, float(p.get("max_N", 20.0))))
        fast = compute_average(cfg.system, f1, f2, x, AverageRequest(N, kappa, method="modal"))
        ref = compute_average(cfg.system, f1, f2, x, AverageRequest(N, kappa, QuadratureRule(rel_tol=1e-12),
                                                                     method="quadrature"))
        diff = abs(fast - ref) / max(abs(ref), 1e-300)
        tol = float(p.get("tol", 1e-8))
        return [{"instance": unit["instance"], "parameter": N, "fast": abs(fast), "reference": abs(ref),
                 "rel_diff": diff, "holds": bool(diff <= tol)}]
    if target not in ("B_delta", "local"):
        raise ConfigurationError(f"unknown oracle target {target!r}")
    grid = _grid(p.get("grid"), {"period_u": 8, "period_v": 8, "n_u": 64, "n_v": 64})
    band = float(p.get("max_xi", 2.5))
    n_modes = int(p.get("n_modes", 6))
    F1 = sparse_band_function(grid, rng, n_modes, (0, band), (0, band))
    F2 = sparse_band_function(grid, rng, n_modes, (0, band), (0, band))
    delta = float(rng.uniform(0.05, 1.0))
    cut = build_cutoffs(delta)
    if target == "B_delta":
        fast = apply_B_delta(F1, F2, cut, delta, kappa)
        ref = brute_force_B_delta(F1, F2, cut, delta, kappa)
    else:
        fast = apply_local_operator(F1, F2, cut, kappa)
        ref = brute_force_local_operator(F1, F2, cut, kappa)
    ref_l1 = lp_norm(ref, 1)
    diff = lp_norm(fast - ref, 1) / max(ref_l1, 1e-300)
    tol = float(p.get("tol", 1e-6))
    return [{"instance": unit["instance"], "parameter": delta, "fast": lp_norm(fast, 1), "reference": ref_l1,
             "rel_diff": diff, "holds": bool(diff <= tol)}]


def _random_poly(rng, d, p):
    return TrigPolynomial.random(rng, d, int(p.get("n_terms", 3)), int(p.get("max_freq", 2)))


_UNITS = {
    "average-trajectory": _unit_trajectory,
    "sandwich": _unit_sandwich,
    "maximal-chain": _unit_maximal,
    "single-quadratic": _unit_single,
    "delta-decay": _unit_decay,
    "lambda-probe": _unit_probe,
    "transference": _unit_transference,
    "oracle-xcheck": _unit_xcheck,
}


def execute_unit(raw, unit):
    """Run one unit of the config ``raw``; module-level so workers can pickle it."""
    cfg = parse_config(raw)
    return _UNITS[cfg.kind](cfg, unit)


# ---- finishing ---------------------------------------------------------------


def _add_fit(rows, ycol, prefix="fit"):
    pts = [(r["parameter"], r[ycol]) for r in rows if r["parameter"] > 0 and r[ycol] > 0]
    fit = None
    if len(pts) >= 2:
        try:
            fit = fit_power_law(*zip(*pts))
        except DomainError:  # degenerate fits are reported as nan
            fit = None
    for r in rows:
        r[f"{prefix}_exponent"] = fit.exponent if fit else math.nan
        r[f"{prefix}_r2"] = fit.r_squared if fit else math.nan
    return rows


def _finish(cfg, rows):
    if cfg.kind == "single-quadratic":
        return _add_fit(rows, "value")
    if cfg.kind == "delta-decay":
        pts = [(r["R"], r["norm_low"], r["norm_high"], r["norm_total"], r["holds"]) for r in rows]
        rep = assemble_decay_report([r["parameter"] for r in rows], pts)
        return rep.to_rows()
    return rows


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


def rows_to_csv(rows):
    """Serialise rows; columns in order of first appearance, floats by repr."""
    cols = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(r.get(c, "")) for c in cols])
    return buf.getvalue()


_PROVENANCE = {
    "average-trajectory": "modal chirp closed form (kappa=2) or composite Gauss-Legendre",
    "sandwich": "modal averages at N and neighbouring lacunary scales",
    "maximal-chain": "Hoelder plus dyadic split, composite Gauss-Legendre power integrals",
    "single-quadratic": "modal chirp closed form or composite Gauss-Legendre",
    "delta-decay": "FFT phase-shift operator, composite Gauss-Legendre in t",
    "lambda-probe": "FFT phase-shift single-copy operator, composite Gauss-Legendre in t",
    "transference": "modal chirp kernels on the orbit box, Riemann sum in (u, v)",
    "oracle-xcheck": "FFT path against sparse-mode summation with adaptive Gauss-Kronrod",
}


def run_experiment(cfg, workers=None, out=None):
    """Execute ``cfg`` and write the CSV and manifest.

    Returns
    -------
    RunOutcome
        ``violations`` lists ``(row_number, row)`` for rows whose ``holds``
        is false; row numbers count data rows from 1.
    """
    workers = workers or worker_count()
    started = time.time()
    units = plan_units(cfg)
    raw = cfg.raw
    if workers > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(execute_unit, [raw] * len(units), units))
    else:
        results = [execute_unit(raw, u) for u in units]
    keyed = [((ui, ri), row) for ui, rows in enumerate(results) for ri, row in enumerate(rows)]
    keyed.sort(key=lambda kv: kv[0])
    rows = _finish(cfg, [row for _, row in keyed])

    csv_path = Path(out or cfg.output)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(rows_to_csv(rows))
    manifest_path = csv_path.with_name(csv_path.name + ".manifest.json")
    manifest = {
        "config_sha256": cfg.sha256,
        "version": __version__,
        "kind": cfg.kind,
        "seed": cfg.seed,
        "started": started,
        "finished": time.time(),
        "workers": workers,
        "units": len(units),
        "rows": len(rows),
        "provenance": {"method": _PROVENANCE[cfg.kind], "params": cfg.params},
    }
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    violations = [(i + 1, r) for i, r in enumerate(rows) if r.get("holds") is False]
    return RunOutcome(cfg.kind, rows, csv_path, manifest_path, violations)
