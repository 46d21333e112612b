"""
Command line entry: ``bilerg run|report|oracle-xcheck``.

Exit codes: 0 ok, 1 inequality violation, 2 configuration error,
3 numerical non-convergence.  Failures print one JSON object on stderr.
"""

import argparse
import json
import sys

from ..errors import ConfigurationError, ConvergenceError, DomainError
from .config import load_config, parse_config
from .report import CsvParseError, format_summary, summarize
from .runner import run_experiment

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_CONVERGENCE = 0, 1, 2, 3


def _fail(code, exc, **extra):
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code, **extra}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return code


def _run(cfg, out):
    outcome = run_experiment(cfg, out=out)
    print(f"{outcome.kind}: wrote {len(outcome.rows)} rows to {outcome.csv_path}")
    print(f"manifest: {outcome.manifest_path}")
    for n, _ in outcome.violations:
        print(f"violation at row {n}")
    return EXIT_VIOLATION if outcome.violations else EXIT_OK


def _guard(fn):
    try:
        return fn()
    except CsvParseError as exc:
        return _fail(EXIT_CONFIG, exc, line=exc.line)
    except (ConfigurationError, DomainError) as exc:
        return _fail(EXIT_CONFIG, exc)
    except ConvergenceError as exc:
        return _fail(EXIT_CONVERGENCE, exc, panels=exc.panels)


def cmd_run(args):
    return _guard(lambda: _run(load_config(args.config), args.out))


def cmd_xcheck(args):
    def go():
        cfg = load_config(args.config)
        raw = {**cfg.raw, "kind": "oracle-xcheck"}
        xcfg = parse_config(raw, args.config)
        out = args.out or str(cfg.output).replace(".csv", "") + ".xcheck.csv"
        return _run(xcfg, out)

    return _guard(go)


def cmd_report(args):
    def go():
        s = summarize(args.csv)
        print(format_summary(s, args.csv))
        return EXIT_VIOLATION if s.violations else EXIT_OK

    return _guard(go)


def build_parser():
    ap = argparse.ArgumentParser(prog="bilerg", description="bilinear ergodic averages laboratory")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment config, writing CSV and manifest")
    r.add_argument("config")
    r.add_argument("--out", help="CSV path (default: the config's output)")
    r.set_defaults(func=cmd_run)
    rep = sub.add_parser("report", help="summarise a result CSV")
    rep.add_argument("csv")
    rep.set_defaults(func=cmd_report)
    x = sub.add_parser("oracle-xcheck", help="cross-check fast paths against brute-force oracles")
    x.add_argument("config")
    x.add_argument("--out")
    x.set_defaults(func=cmd_xcheck)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
