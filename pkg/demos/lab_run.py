"""Drive the experiment runner from a configuration, as the CLI does.

Writes a small maximal-chain config into a temporary folder, runs it, and
prints the summary the ``report`` subcommand would show.  The same config can
be run from a shell with ``bilerg run cfg.json`` then ``bilerg report out.csv``.
"""

import json
import tempfile
from pathlib import Path

from bilerg.lab.config import load_config
from bilerg.lab.report import format_summary, summarize
from bilerg.lab.runner import run_experiment

config = {
    "kind": "maximal-chain",
    "seed": 11,
    "output": "chain.csv",
    "observables": {
        "f1": {"random": {"n_terms": 3, "max_freq": 2}},
        "f2": {"random": {"n_terms": 3, "max_freq": 2}},
    },
    "params": {"N": 4, "p": 2, "q": 2, "n_points": 40, "chunk": 20},
}

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "cfg.json"
    path.write_text(json.dumps(config, indent=2))
    out = run_experiment(load_config(path), workers=1)
    print(out.csv_path.read_text().splitlines()[0])
    print(format_summary(summarize(out.csv_path), out.csv_path.name))
