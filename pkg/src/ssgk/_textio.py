"""Low-level line-oriented readers/writers for the plain-text matrix formats.

Shared by the data loaders and the Gram serializer. All writers emit 17
significant digits so that load(save(x)) is bit-exact for float64.
"""

from __future__ import annotations

import numpy as np


class DataFileError(ValueError):
    """Malformed input file; message carries ``path:line:`` context."""


def format_value(v: float) -> str:
    return f"{float(v):.17g}"


def format_row(row) -> str:
    return " ".join(format_value(v) for v in row)


class LineReader:
    """Iterates data lines of a text file, skipping '#' comments, tracking line numbers."""

    def __init__(self, path: str):
        self.path = path
        try:
            with open(path, "r", encoding="utf-8") as fh:
                self._lines = fh.readlines()
        except OSError as exc:
            raise DataFileError(f"{path}: cannot read file: {exc}") from exc
        self._pos = 0
        self.lineno = 0

    def next_data_line(self) -> str | None:
        """Next non-comment line, or None at end of file."""
        while self._pos < len(self._lines):
            line = self._lines[self._pos]
            self._pos += 1
            self.lineno = self._pos
            if line.lstrip().startswith("#"):
                continue
            return line
        return None

    def fail(self, message: str):
        raise DataFileError(f"{self.path}:{self.lineno}: {message}")


def parse_floats(reader: LineReader, line: str, expected: int) -> np.ndarray:
    tokens = line.split()
    if len(tokens) != expected:
        reader.fail(f"expected {expected} values, got {len(tokens)}")
    try:
        return np.array([float(t) for t in tokens], dtype=np.float64)
    except ValueError:
        bad = next(t for t in tokens if not _is_float(t))
        reader.fail(f"non-numeric token {bad!r}")


def _is_float(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def read_square_block(reader: LineReader, n: int) -> np.ndarray:
    """Reads n rows of n floats."""
    rows = []
    for _ in range(n):
        line = reader.next_data_line()
        if line is None:
            reader.fail(f"unexpected end of file, expected {n} matrix rows")
        rows.append(parse_floats(reader, line, n))
    return np.vstack(rows)


def expect_end(reader: LineReader):
    line = reader.next_data_line()
    if line is not None and line.strip():
        reader.fail("unexpected trailing content")


def write_lines(path: str, lines) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")
