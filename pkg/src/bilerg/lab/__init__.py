"""Configuration-driven experiment runner, reports and command line."""

from .config import KINDS, ExperimentConfig, load_config, parse_config, rng_for
from .report import CsvParseError, summarize
from .runner import RunOutcome, run_experiment
