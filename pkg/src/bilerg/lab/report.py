"""
Summaries of result CSVs: fitted exponents and inequality violations.
"""

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigurationError, DomainError
from ..numerics import fit_power_law

__all__ = ["CsvParseError", "Summary", "read_rows", "summarize", "format_summary"]

# columns fitted against ``parameter`` when present
_FIT_COLUMNS = ("norm_total", "norm_low", "value")


class CsvParseError(ConfigurationError):
    """Malformed result CSV; ``line`` is the 1-based physical line."""

    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass
class Summary:
    n_rows: int
    columns: list
    checked: int = 0
    violations: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)


def _parse(cell):
    if cell in ("true", "false"):
        return cell == "true"
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell


def read_rows(path):
    """Parse a result CSV into typed dicts, checking its shape line by line."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}") from exc
    reader = csv.reader(text.splitlines())
    try:
        header = next(reader)
    except StopIteration:
        raise CsvParseError("empty file, expected a header", 1) from None
    except csv.Error as exc:
        raise CsvParseError(str(exc), 1) from None
    if not header or any(not h for h in header) or len(set(header)) != len(header):
        raise CsvParseError("header must name every column exactly once", 1)
    rows = []
    while True:
        try:
            cells = next(reader)
        except StopIteration:
            break
        except csv.Error as exc:
            raise CsvParseError(str(exc), reader.line_num) from None
        if len(cells) != len(header):
            raise CsvParseError(f"expected {len(header)} fields, found {len(cells)}", reader.line_num)
        row = {h: _parse(c) for h, c in zip(header, cells)}
        if "holds" in row and not isinstance(row["holds"], bool):
            raise CsvParseError(f"holds must be true or false, found {cells[header.index('holds')]!r}",
                                reader.line_num)
        rows.append(row)
    return header, rows


def summarize(path):
    header, rows = read_rows(path)
    s = Summary(len(rows), header)
    if "holds" in header:
        s.checked = len(rows)
        s.violations = [(i + 1, r) for i, r in enumerate(rows) if r["holds"] is False]
    if "parameter" in header:
        for col in _FIT_COLUMNS:
            if col not in header:
                continue
            pts = [(r["parameter"], r[col]) for r in rows
                   if isinstance(r["parameter"], (int, float)) and isinstance(r[col], (int, float))
                   and r["parameter"] > 0 and r[col] > 0 and math.isfinite(r[col])]
            # one fit per distinct parameter set; repeated points are averaged by the fit itself
            if len({p for p, _ in pts}) >= 2:
                try:
                    s.fits[col] = fit_power_law(*zip(*pts))
                except DomainError:
                    pass
    return s


def _confidence(r2):
    if r2 >= 0.99:
        return "tight"
    if r2 >= 0.9:
        return "usable"
    return "weak, treat as descriptive"


def format_summary(s, path=""):
    lines = [f"{path}: {s.n_rows} rows"]
    for col, fit in s.fits.items():
        lines.append(
            f"  {col} ~ parameter^{fit.exponent!r}  (prefactor {fit.prefactor:.4g}, "
            f"r^2 {fit.r_squared:.4f}, {fit.points_used} points, {_confidence(fit.r_squared)})"
        )
    if s.checked:
        lines.append(f"  {len(s.violations)} violations in {s.checked} checked rows")
        for n, r in s.violations:
            desc = ", ".join(f"{k}={r[k]}" for k in r if k != "holds")
            lines.append(f"  violation at row {n}: {desc}")
    else:
        lines.append("  0 violations (no holds column)")
    return "\n".join(lines)
