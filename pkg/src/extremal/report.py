"""Tabular experiment reports and their CSV / JSON serialisation.

CSV layout (UTF-8, LF line endings)::

    # extremal report
    # experiment spacing
    # version 0.1.0
    # config seed=42
    # config family=pareto
    ...
    N,median_spacing,median_stderr
    100,3.43,0.05
    ...
    # summary slope=0.4923
    # note ...

Lines starting with ``#`` are comments; the remaining lines are an
RFC 4180 table. Columns holding base-2 log magnitudes carry a ``log2:``
prefix. ``# config`` lines, stripped of their prefix, form a valid config
file that reproduces the report.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ",".join(_fmt(v) for v in value)
    return str(value)


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return _fmt(value)
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if hasattr(value, "item"):
        return _json_safe(value.item())
    return value


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    columns: list[str]
    rows: list[dict]
    summary: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    duration_s: float = 0.0
    version: str = __version__

    def __post_init__(self):
        for row in self.rows:
            missing = set(self.columns) - set(row)
            if missing:
                raise ValueError(f"row lacks columns {sorted(missing)}")

    def to_csv(self, timing: bool = False) -> str:
        buf = io.StringIO()
        buf.write("# extremal report\n")
        buf.write(f"# experiment {self.experiment}\n")
        buf.write(f"# version {self.version}\n")
        for key, value in self.config.items():
            buf.write(f"# config {key}={_fmt(value)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt(row[c]) for c in self.columns])
        for key, value in self.summary.items():
            buf.write(f"# summary {key}={_fmt(value)}\n")
        for note in self.notes:
            buf.write(f"# note {note}\n")
        if timing:
            buf.write(f"# duration_s {self.duration_s:.3f}\n")
        return buf.getvalue()

    def to_json(self, timing: bool = False) -> str:
        doc = {
            "experiment": self.experiment,
            "version": self.version,
            "config": self.config,
            "columns": self.columns,
            "rows": [{c: row[c] for c in self.columns} for row in self.rows],
            "summary": self.summary,
            "notes": self.notes,
        }
        if timing:
            doc["duration_s"] = round(self.duration_s, 3)
        return json.dumps(_json_safe(doc), indent=2, sort_keys=False) + "\n"

    def render(self, fmt: str = "csv", timing: bool = False) -> str:
        if fmt == "csv":
            return self.to_csv(timing)
        if fmt == "json":
            return self.to_json(timing)
        raise ValueError(f"unknown format {fmt!r}")

    def table(self) -> str:
        """Plain aligned text for terminals."""
        cells = [self.columns] + [[_short(row[c]) for c in self.columns] for row in self.rows]
        widths = [max(len(r[i]) for r in cells) for i in range(len(self.columns))]
        lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
        lines += [f"{k}: {_short(v)}" for k, v in self.summary.items()]
        lines += [f"note: {n}" for n in self.notes]
        return "\n".join(lines) + "\n"


def _short(value) -> str:
    if isinstance(value, float) and math.isfinite(value) and value != 0:
        if abs(value) >= 1e6 or abs(value) < 1e-3:
            return f"{value:.4e}"
        return f"{value:.5g}"
    return _fmt(value)


def read_config_echo(text: str) -> tuple[str | None, dict]:
    """Recover ``(experiment, config)`` from a CSV or JSON report."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        doc = json.loads(stripped)
        return doc.get("experiment"), dict(doc.get("config", {}))
    experiment, config = None, {}
    for line in text.splitlines():
        if line.startswith("# experiment "):
            experiment = line[len("# experiment "):].strip()
        elif line.startswith("# config "):
            key, _, value = line[len("# config "):].partition("=")
            config[key.strip()] = value.strip()
    return experiment, config


def atomic_write(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to a temp file beside ``path``, then rename over it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
