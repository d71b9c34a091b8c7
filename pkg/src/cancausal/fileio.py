"""CSV datasets with a one-line JSON metadata comment, and versioned JSON reports."""

from __future__ import annotations

import csv
import io as _io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .scm.model import Dataset

SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# datasets

def format_csv(ds: Dataset, include_hidden: bool = False) -> str:
    view = ds if include_hidden else ds.observed_view()
    meta = {"seed": ds.seed, "hidden": [c for c, o in zip(view.columns, view.observed) if not o],
            **{k: v for k, v in ds.meta.items() if k not in ("seed", "hidden")}}
    buf = _io.StringIO()
    buf.write("# " + json.dumps(meta, sort_keys=True) + "\n")
    buf.write(",".join(view.columns) + "\n")
    np.savetxt(buf, view.data, fmt="%.17g", delimiter=",")
    return buf.getvalue()


def write_csv(ds: Dataset, path, include_hidden: bool = False) -> None:
    Path(path).write_text(format_csv(ds, include_hidden))


class DatasetFormatError(ValueError):
    pass


def read_csv(path) -> Dataset:
    text = Path(path).read_text()
    lines = text.splitlines()
    meta = {}
    start = 0
    if lines and lines[0].startswith("#"):
        try:
            meta = json.loads(lines[0][1:].strip() or "{}")
        except json.JSONDecodeError as exc:
            raise DatasetFormatError(f"line 1: bad metadata comment: {exc}") from None
        start = 1
    if len(lines) <= start:
        raise DatasetFormatError("missing header row")
    header = next(csv.reader([lines[start]]))
    header = [h.strip() for h in header]
    rows = []
    for i, line in enumerate(lines[start + 1:], start=start + 2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(header):
            raise DatasetFormatError(f"line {i}: expected {len(header)} fields, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise DatasetFormatError(f"line {i}: non-numeric field") from None
    hidden = set(meta.get("hidden", []))
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    try:
        return Dataset(header, [c not in hidden for c in header], data, meta.get("seed"),
                       {k: v for k, v in meta.items() if k not in ("seed", "hidden")})
    except ValueError as exc:
        raise DatasetFormatError(str(exc)) from None


# ---------------------------------------------------------------------------
# reports

def _plain(obj):
    """Convert numpy scalars and tuples so the JSON form is canonical."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    return obj


@dataclass
class Report:
    """Output of one CLI command.

    ``timing`` holds wall-clock data and is the only field allowed to differ
    between two runs with the same flags and seeds.
    """

    command: list
    config: dict
    results: list
    seeds: list
    timing: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def to_dict(self, with_timing: bool = True) -> dict:
        d = {"schema_version": self.schema_version, "command": self.command,
             "config": self.config, "results": self.results, "seeds": self.seeds}
        if with_timing:
            d["timing"] = self.timing
        return _plain(d)

    def to_json(self, with_timing: bool = True) -> str:
        return json.dumps(self.to_dict(with_timing), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        version = d.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema version {version!r}")
        return cls(d["command"], d["config"], d["results"], d["seeds"], d.get("timing", {}),
                   version)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls.from_dict(json.loads(text))

    def write(self, path) -> None:
        Path(path).write_text(self.to_json())


def read_report(path) -> Report:
    return Report.from_json(Path(path).read_text())
