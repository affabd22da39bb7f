"""Atomic result files in CSV or JSON."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile

__all__ = ["atomic_write_text", "rows_to_csv", "rows_to_json", "write_rows"]


def atomic_write_text(path: str, text: str) -> None:
    """Write via a temp file + rename so interrupted runs leave no stub."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def rows_to_csv(rows, fieldnames=None) -> str:
    rows = list(rows)
    if fieldnames is None:
        fieldnames = list(rows[0].keys()) if rows else []
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def rows_to_json(rows) -> str:
    return json.dumps(list(rows), indent=2) + "\n"


def write_rows(path: str, rows, fmt: str) -> None:
    if fmt == "csv":
        atomic_write_text(path, rows_to_csv(rows))
    elif fmt == "json":
        atomic_write_text(path, rows_to_json(rows))
    else:
        raise ValueError(f"unknown output format {fmt!r}")
