"""
Declarative experiment configuration.

A config is a JSON object::

    {
      "kind": "single-quadratic",
      "seed": 7,
      "output": "out/single.csv",
      "system": {"d": 2, "s_dir": [1.0, 1.4142135623730951], "t_dir": [0.0, 1.0]},
      "observables": {"f2": [{"k": [0, 1], "re": 1.0, "im": 0.0}]},
      "params": {"Ns": [16, 32, 64]}
    }

Observables are trigonometric polynomials in the usual JSON form, or
``{"random": {"n_terms": 3, "max_freq": 2}}`` for a seeded random one, or
``{"constant": 1.0}``.
"""

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..dynamics import FlowPair, TrigPolynomial
from ..errors import ConfigurationError

__all__ = ["KINDS", "ExperimentConfig", "load_config", "parse_config", "rng_for"]

KINDS = (
    "average-trajectory",
    "sandwich",
    "maximal-chain",
    "single-quadratic",
    "delta-decay",
    "lambda-probe",
    "transference",
    "oracle-xcheck",
)

# parameter name -> (predicate, message); list-valued keys are checked elementwise
_RANGES = {
    "delta": (lambda d: 0 < d <= 1, "delta must lie in (0, 1]"),
    "deltas": (lambda d: 0 < d <= 1, "every delta must lie in (0, 1]"),
    "alpha": (lambda a: a > 1, "alpha must exceed 1"),
    "N": (lambda n: n >= 1, "N must be at least 1"),
    "Ns": (lambda n: n >= 1, "every N must be at least 1"),
    "kappa": (lambda k: k > 0, "kappa must be positive"),
    "n_points": (lambda n: n >= 1 and n == int(n), "n_points must be a positive integer"),
    "lambdas": (lambda lam: lam >= 0, "every lambda must be non-negative"),
}


def rng_for(seed, stream=0):
    """Counter-based generator for ``(seed, stream)``; streams never overlap."""
    return np.random.Generator(np.random.Philox(key=int(seed)).jumped(int(stream)))


def _canonical(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    seed: int
    system: FlowPair
    observables: dict
    params: dict
    output: str
    raw: dict = field(repr=False, compare=False, default=None)

    @property
    def sha256(self):
        body = dict(self.raw)
        body.pop("output", None)
        return hashlib.sha256(_canonical(body).encode()).hexdigest()

    def observable(self, name, stream):
        """Materialise observable ``name``; random ones draw from ``stream``."""
        if name not in self.observables:
            raise ConfigurationError(f"observable {name!r} missing from config")
        spec = self.observables[name]
        d = self.system.dimension
        if isinstance(spec, dict) and "constant" in spec:
            return TrigPolynomial.constant(complex(spec["constant"]), d)
        if isinstance(spec, dict) and "random" in spec:
            r = spec["random"]
            return TrigPolynomial.random(rng_for(self.seed, stream), d, int(r["n_terms"]), int(r["max_freq"]))
        try:
            return TrigPolynomial.from_json(spec, d)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"bad observable {name!r}: {exc}") from exc


def _check_ranges(params):
    for key, value in params.items():
        if key not in _RANGES:
            continue
        ok, msg = _RANGES[key]
        values = value if isinstance(value, list) else [value]
        for v in values:
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v) or not ok(v):
                raise ConfigurationError(f"{msg} (got {key}={value!r})")


def parse_config(data, source="<config>"):
    """Validate a decoded config mapping."""
    if not isinstance(data, dict):
        raise ConfigurationError(f"{source}: top level must be an object")
    kind = data.get("kind")
    if kind not in KINDS:
        raise ConfigurationError(f"{source}: unknown experiment kind {kind!r}; expected one of {', '.join(KINDS)}")
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
        raise ConfigurationError(f"{source}: seed must be a 64-bit unsigned integer")
    sys_spec = data.get("system", {"d": 2, "s_dir": [1.0, math.sqrt(2)], "t_dir": [math.sqrt(3), 0.5]})
    try:
        system = FlowPair.from_json(json.dumps(sys_spec))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"{source}: bad system spec: {exc}") from exc
    params = data.get("params", {})
    if not isinstance(params, dict):
        raise ConfigurationError(f"{source}: params must be an object")
    _check_ranges(params)
    observables = data.get("observables", {})
    output = data.get("output", "results.csv")
    return ExperimentConfig(kind, seed, system, observables, params, str(output), raw=data)


def load_config(path):
    """Read and validate a JSON config file."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    cfg = parse_config(data, str(path))
    out = Path(cfg.output)
    if not out.is_absolute():
        cfg = ExperimentConfig(cfg.kind, cfg.seed, cfg.system, cfg.observables, cfg.params,
                               str(path.parent / out), raw=cfg.raw)
    return cfg
