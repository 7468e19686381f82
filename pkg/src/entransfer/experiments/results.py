"""Tabular experiment output with a reproducibility header."""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field

from .. import __version__

PRECISION = 12


def _num(v):
    if v is None:
        return None
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, int):
        return v
    if isinstance(v, str):
        return v
    v = float(v)
    if not math.isfinite(v):
        return None
    return float(f"{v:.{PRECISION}g}")


def _cell(v) -> str:
    v = _num(v)
    if v is None:
        return "null"
    if isinstance(v, float):
        return f"{v:.{PRECISION}g}"
    return str(v)


@dataclass
class SweepResult:
    """Rows in a fixed column order plus metadata that pins down the run."""

    experiment: str
    columns: tuple
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def column(self, name):
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def where(self, **match):
        idx = {k: self.columns.index(k) for k in match}
        return [row for row in self.rows if all(row[i] == match[k] for k, i in idx.items())]

    def header(self) -> dict:
        return {"tool": "entransfer", "version": __version__, "experiment": self.experiment, **self.metadata}

    def to_csv(self) -> str:
        lines = [f"# {key}: {json.dumps(_jsonable(val), sort_keys=True)}" for key, val in self.header().items()]
        lines.append(",".join(self.columns))
        lines.extend(",".join(_cell(v) for v in row) for row in self.rows)
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {
            "metadata": _jsonable(self.header()),
            "columns": list(self.columns),
            "rows": [[_num(v) for v in row] for row in self.rows],
        }
        return json.dumps(doc, sort_keys=True, indent=1) + "\n"

    def render(self, fmt: str = "csv") -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ValueError(f"unknown format {fmt!r}")

    def write(self, path: str, fmt: str = "csv"):
        text = self.render(fmt)
        if path in (None, "-"):
            sys.stdout.write(text)
        else:
            with open(path, "w", newline="") as fh:
                fh.write(text)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return _num(v)
