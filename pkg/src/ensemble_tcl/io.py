"""Reading and writing draw files, estimate files and simulation outputs.

Draw files are draw-major, the way MCMC software writes iterations:

* CSV: the first row holds the unit ids, every later row is one joint draw.
* NDJSON: one JSON object ``{unit_id: value, ...}`` per line, one line per
  draw; every line must carry the same ids.

Floats are written with ``repr`` so that a written file reads back to the
identical ``DrawMatrix``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .ensemble import ClassificationEstimate, DrawMatrix, EnsembleError

__all__ = [
    "InputFormatError",
    "atomic_write",
    "atomic_write_many",
    "detect_format",
    "draws_to_text",
    "file_digest",
    "parse_draws",
    "parse_estimates",
    "read_draws",
    "read_estimates",
]

LABEL_WORDS = {
    "above": True,
    "below": False,
    "1": True,
    "0": False,
    "true": True,
    "false": False,
}


class InputFormatError(EnsembleError):
    """Malformed input file; ``line``/``column`` are 1-based when known."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


def detect_format(path: os.PathLike | str) -> str:
    suffix = Path(path).suffix.lower()
    return "ndjson" if suffix in (".ndjson", ".jsonl") else "csv"


def file_digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def _parse_value(text: str, line: int, column: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise InputFormatError(f"cannot parse {text!r} as a number", line, column) from None
    if not math.isfinite(value):
        raise InputFormatError(f"non-finite value {text!r}", line, column)
    return value


def _parse_csv_draws(text: str) -> DrawMatrix:
    rows = csv.reader(io.StringIO(text))
    try:
        header = next(rows)
    except StopIteration:
        raise InputFormatError("empty draw file: no header row", 1) from None
    except csv.Error as exc:
        raise InputFormatError(str(exc), 1) from None
    ids = [h.strip() for h in header]
    if not ids or any(not u for u in ids):
        raise InputFormatError("header must list non-empty unit ids", 1)
    if len(set(ids)) != len(ids):
        raise InputFormatError("duplicate unit id in header", 1)
    columns: list[list[float]] = [[] for _ in ids]
    try:
        for row in rows:
            line = rows.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(ids):
                raise InputFormatError(
                    f"expected {len(ids)} fields, found {len(row)}", line, min(len(row), len(ids)) + 1
                )
            for j, cell in enumerate(row):
                columns[j].append(_parse_value(cell.strip(), line, j + 1))
    except csv.Error as exc:
        raise InputFormatError(str(exc), rows.line_num) from None
    if not columns[0]:
        raise InputFormatError("empty ensemble unit: the file has no draw rows")
    return DrawMatrix(ids, np.array(columns))


def _reject_constant(name: str):
    raise ValueError(f"non-finite value {name}")


def _parse_ndjson_draws(text: str) -> DrawMatrix:
    ids: Optional[list[str]] = None
    columns: list[list[float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw, parse_constant=_reject_constant)
        except json.JSONDecodeError as exc:
            raise InputFormatError(exc.msg, lineno, exc.colno) from None
        except ValueError as exc:
            raise InputFormatError(str(exc), lineno) from None
        if not isinstance(obj, dict) or not obj:
            raise InputFormatError("each line must be a non-empty JSON object", lineno, 1)
        if ids is None:
            ids = [str(k) for k in obj]
            columns = [[] for _ in ids]
        elif set(obj) != set(ids):
            raise InputFormatError("unit ids differ from the first draw", lineno)
        for j, key in enumerate(ids):
            value = obj[key]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise InputFormatError(f"unit {key!r}: value {value!r} is not a number", lineno)
            columns[j].append(float(value))
    if ids is None:
        raise InputFormatError("empty ensemble unit: the file has no draws")
    return DrawMatrix(ids, np.array(columns))


def parse_draws(text: str, fmt: str = "csv") -> DrawMatrix:
    if fmt == "csv":
        return _parse_csv_draws(text)
    if fmt == "ndjson":
        return _parse_ndjson_draws(text)
    raise EnsembleError(f"unknown draw file format {fmt!r}")


def read_draws(path: os.PathLike | str, fmt: Optional[str] = None) -> tuple[DrawMatrix, str]:
    """Load a draw file; returns the matrix and a digest of the raw bytes."""
    data = Path(path).read_bytes()
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise InputFormatError(f"not UTF-8 text: {exc}") from None
    return parse_draws(text, fmt or detect_format(path)), file_digest(data)


def draws_to_text(m: DrawMatrix, fmt: str = "csv") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(m.unit_ids)
        for s in range(m.S):
            writer.writerow([repr(float(v)) for v in m.draws[:, s]])
        return buf.getvalue()
    if fmt == "ndjson":
        lines = (
            json.dumps(dict(zip(m.unit_ids, map(float, m.draws[:, s]))))
            for s in range(m.S)
        )
        return "".join(line + "\n" for line in lines)
    raise EnsembleError(f"unknown draw file format {fmt!r}")


def parse_estimates(text: str, unit_ids: Iterable[str], threshold: float) -> ClassificationEstimate:
    """Parse ``unit_id,estimate`` or ``unit_id,label`` CSV, reordered to ``unit_ids``."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip().lower() for h in next(reader)]
    except StopIteration:
        raise InputFormatError("empty estimates file", 1) from None
    if len(header) != 2 or header[0] != "unit_id" or header[1] not in ("estimate", "label"):
        raise InputFormatError("header must be 'unit_id,estimate' or 'unit_id,label'", 1)
    kind = header[1]
    values: dict[str, object] = {}
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise InputFormatError(f"expected 2 fields, found {len(row)}", line)
        uid, cell = row[0].strip(), row[1].strip()
        if uid in values:
            raise InputFormatError(f"duplicate unit id {uid!r}", line, 1)
        if kind == "estimate":
            values[uid] = _parse_value(cell, line, 2)
        else:
            word = cell.lower()
            if word not in LABEL_WORDS:
                raise InputFormatError(f"label {cell!r} is not above/below/1/0/true/false", line, 2)
            values[uid] = LABEL_WORDS[word]
    ids = list(unit_ids)
    if set(values) != set(ids):
        extra = sorted(set(values) - set(ids))
        missing = sorted(set(ids) - set(values))
        raise EnsembleError(f"unit ids do not match the draw file (missing {missing[:5]}, extra {extra[:5]})")
    ordered = [values[u] for u in ids]
    if kind == "estimate":
        return ClassificationEstimate.from_estimates(ids, ordered, threshold)
    return ClassificationEstimate.from_labels(ids, ordered, threshold)


def read_estimates(path: os.PathLike | str, unit_ids: Iterable[str], threshold: float) -> ClassificationEstimate:
    return parse_estimates(Path(path).read_text(encoding="utf-8-sig"), unit_ids, threshold)


def estimates_to_text(est: ClassificationEstimate) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if est.estimates is not None:
        writer.writerow(["unit_id", "estimate"])
        writer.writerows((u, repr(float(v))) for u, v in zip(est.unit_ids, est.estimates))
    else:
        writer.writerow(["unit_id", "label"])
        writer.writerows((u, "above" if b else "below") for u, b in zip(est.unit_ids, est.labels))
    return buf.getvalue()


def atomic_write(path: os.PathLike | str, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_many(files: dict[Path, str]) -> None:
    """Write several files; on failure remove those already written."""
    written: list[Path] = []
    try:
        for path, text in files.items():
            existed = path.exists()
            atomic_write(path, text)
            if not existed:
                written.append(path)
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        raise
