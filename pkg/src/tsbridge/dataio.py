"""Reading and writing datasets and reports.

The dataset format is a long CSV with a leading grid comment:

    # grid: t1,...,tN; d=D
    path_id,date,dim,value
    0,1.0,0,0.123

Floats are rendered with repr, which round-trips exactly, so
write -> read reproduces a dataset bit for bit.  Rows are sorted by
(path_id, date, dim); files are UTF-8 with LF line endings.
"""
from __future__ import annotations

import hashlib
import json

import numpy as np

from .core import Dataset, TimeGrid, ValidationError

__all__ = [
    "format_float",
    "write_dataset_csv",
    "read_dataset_csv",
    "write_json",
    "sha256_file",
]

_HEADER = "path_id,date,dim,value"


def format_float(x: float) -> str:
    """Shortest decimal string that parses back to the same double."""
    return repr(float(x))


def write_dataset_csv(data: Dataset, path) -> None:
    """Serialize a dataset in the long CSV format described above."""
    dates = [format_float(t) for t in data.grid.dates]
    lines = [f"# grid: {','.join(dates)}; d={data.dim}", _HEADER]
    v = data.values
    for m in range(data.n_paths):
        for i in range(data.grid.n):
            for k in range(data.dim):
                lines.append(f"{m},{dates[i]},{k},{format_float(v[m, i, k])}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_header(line: str):
    if not line.startswith("# grid: ") or "; d=" not in line:
        raise ValidationError("line 1: expected a '# grid: t1,...,tN; d=D' comment")
    body, _, dim_part = line[len("# grid: "):].partition("; d=")
    try:
        dates = [float(tok) for tok in body.split(",")]
        dim = int(dim_part)
    except ValueError:
        raise ValidationError("line 1: malformed grid comment") from None
    return TimeGrid(dates), dim


def read_dataset_csv(path) -> Dataset:
    """Parse a dataset CSV, enforcing the format and the row ordering."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if len(lines) < 3:
        raise ValidationError("file has no data rows")
    grid, dim = _parse_header(lines[0])
    if lines[1] != _HEADER:
        raise ValidationError(f"line 2: expected header '{_HEADER}'")
    n = grid.n
    n_rows = len(lines) - 2
    if n_rows % (n * dim) != 0:
        raise ValidationError(
            f"{n_rows} data rows is not a multiple of N*d = {n * dim}; file truncated?"
        )
    m = n_rows // (n * dim)
    values = np.empty((m, n, dim))
    row = 2
    for pid in range(m):
        for i in range(n):
            for k in range(dim):
                parts = lines[row].split(",")
                if len(parts) != 4:
                    raise ValidationError(f"line {row + 1}: expected 4 comma-separated fields")
                try:
                    rid, date, rdim, val = int(parts[0]), float(parts[1]), int(parts[2]), float(parts[3])
                except ValueError:
                    raise ValidationError(f"line {row + 1}: malformed row {lines[row]!r}") from None
                if rid != pid or rdim != k:
                    raise ValidationError(
                        f"line {row + 1}: rows must be sorted by (path_id, date, dim); "
                        f"expected path {pid} dim {k}, got path {rid} dim {rdim}"
                    )
                if date != grid.dates[i]:
                    raise ValidationError(
                        f"line {row + 1}: date {parts[1]} does not match grid date "
                        f"{format_float(grid.dates[i])}"
                    )
                values[pid, i, k] = val
                row += 1
    return Dataset(grid, values)


def write_json(obj, path) -> None:
    """Write a JSON document with stable key order and LF endings."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, ensure_ascii=False)
        fh.write("\n")


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()
