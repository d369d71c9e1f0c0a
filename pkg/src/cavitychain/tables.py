"""Result tables and their CSV / JSON serialisation.

Complex columns are written as ``<name>_re`` and ``<name>_im``.  Floats are
written in their shortest round-trip form (at most 17 significant digits),
so a write/read cycle is lossless.  CSV files carry
their metadata as ``#`` comment lines above the header row.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["ResultTable", "emit", "load_table", "format_number"]


@dataclass
class ResultTable:
    name: str
    columns: list
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"row of {len(values)} values for {len(self.columns)} columns")
        self.rows.append(list(values))

    def flat_columns(self) -> list:
        out = []
        for j, c in enumerate(self.columns):
            if self._is_complex(j):
                out += [f"{c}_re", f"{c}_im"]
            else:
                out.append(c)
        return out

    def flat_rows(self) -> list:
        cplx = [self._is_complex(j) for j in range(len(self.columns))]
        out = []
        for row in self.rows:
            flat = []
            for v, is_c in zip(row, cplx):
                if is_c:
                    v = complex(v)
                    flat += [v.real, v.imag]
                else:
                    flat.append(_plain(v))
            out.append(flat)
        return out

    def _is_complex(self, j: int) -> bool:
        return any(isinstance(r[j], (complex, np.complexfloating)) for r in self.rows)


def _plain(v):
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def format_number(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return format_number(v)
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    return _plain(v)


def emit(table: ResultTable, directory, fmt: str = "csv") -> Path:
    """Write ``table`` to ``directory/<name>.<fmt>`` and return the path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        path = directory / f"{table.name}.csv"
        buf = io.StringIO()
        for key in sorted(table.meta):
            buf.write(f"# {key}: {json.dumps(_json_safe(table.meta[key]), sort_keys=True)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(table.flat_columns())
        for row in table.flat_rows():
            w.writerow([format_number(v) for v in row])
        path.write_text(buf.getvalue(), encoding="utf-8")
    elif fmt == "json":
        path = directory / f"{table.name}.json"
        doc = {
            "meta": _json_safe(table.meta),
            "columns": table.flat_columns(),
            "rows": _json_safe(table.flat_rows()),
        }
        path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return path


def _parse(s: str):
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def load_table(path) -> tuple[dict, list, list]:
    """Read back ``(meta, columns, rows)`` from a file written by :func:`emit`."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        doc = json.loads(text)
        rows = [[_parse(v) if isinstance(v, str) else v for v in r] for r in doc["rows"]]
        return doc["meta"], doc["columns"], rows
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, val = line[2:].partition(": ")
            meta[key] = json.loads(val)
        else:
            body.append(line)
    reader = list(csv.reader(body))
    if not reader:
        return meta, [], []
    return meta, reader[0], [[_parse(v) for v in r] for r in reader[1:]]
