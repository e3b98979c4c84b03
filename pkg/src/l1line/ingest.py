"""CSV input for the command-line tools.

Comma-separated numeric matrix, one point per row. A header row is
auto-detected (any cell of the first row that does not parse as a number).
Error positions are reported 1-based, counting the header row as row 1.
"""

from __future__ import annotations

import csv
import hashlib
import io

from .core import ContractError, DataMatrix

__all__ = ["CsvParseError", "LoadedMatrix", "load_csv_bytes", "load_csv_file"]


class CsvParseError(Exception):
    """A cell or row of the CSV cannot be used; row/column are 1-based."""

    def __init__(self, row: int, column: int | None, message: str):
        self.row = row
        self.column = column
        super().__init__(message)


class LoadedMatrix:
    def __init__(self, data: DataMatrix, fingerprint: str, header: list[str] | None):
        self.data = data
        self.fingerprint = fingerprint
        self.header = header


def _is_number(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def load_csv_bytes(raw: bytes) -> LoadedMatrix:
    fingerprint = hashlib.sha256(raw).hexdigest()
    text = raw.decode("utf-8-sig")
    reader = csv.reader(io.StringIO(text))
    rows = [r for r in reader]
    # Trailing blank lines are noise, interior ones are errors.
    while rows and all(c.strip() == "" for c in rows[-1]):
        rows.pop()
    if not rows:
        raise CsvParseError(1, None, "the file contains no data rows")

    header: list[str] | None = None
    start = 0
    first = [c.strip() for c in rows[0]]
    if any(not _is_number(c) for c in first):
        header = first
        start = 1
        if start == len(rows):
            raise CsvParseError(2, None, "header present but no data rows follow")

    width = len(rows[start])
    matrix: list[list[float]] = []
    for r in range(start, len(rows)):
        cells = rows[r]
        if all(c.strip() == "" for c in cells):
            raise CsvParseError(r + 1, None, f"row {r + 1} is blank")
        if len(cells) != width:
            raise CsvParseError(
                r + 1,
                None,
                f"row {r + 1} has {len(cells)} cells, expected {width}",
            )
        parsed = []
        for c, cell in enumerate(cells):
            s = cell.strip()
            if not _is_number(s):
                raise CsvParseError(
                    r + 1,
                    c + 1,
                    f"row {r + 1}, column {c + 1}: {cell!r} is not a number",
                )
            parsed.append(float(s))
        matrix.append(parsed)

    data = DataMatrix(matrix)  # ContractError propagates (validation failure)
    return LoadedMatrix(data, fingerprint, header)


def load_csv_file(path: str) -> LoadedMatrix:
    """Read and parse a CSV file. OSError propagates (unreadable input)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    return load_csv_bytes(raw)
