"""Tabular input and output: CSV/TSV matrices, rows = features, columns = samples."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidInput, ParseError
from .matrix import DataMatrix

_MISSING_TOKENS = {"", "na", "nan", "null", "n/a"}


@dataclass(frozen=True)
class ParseOptions:
    """How to read a matrix file.

    ``header`` and ``row_ids`` accept "auto" (detect from content),
    "yes" or "no".  ``delimiter`` of None picks tab for .tsv files and
    comma otherwise.  Group labels for the columns come either from
    ``group_sizes`` (e.g. (44, 19): first 44 columns are group one) or
    from ``groups_file``, a text file with one label per column line.
    """

    delimiter: str | None = None
    header: str = "auto"
    row_ids: str = "auto"
    group_sizes: tuple[int, ...] | None = None
    groups_file: str | None = None


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return token.strip().lower() not in _MISSING_TOKENS


def _parse_cell(token: str, row: int, col: int) -> float:
    stripped = token.strip()
    if stripped.lower() in _MISSING_TOKENS:
        raise ParseError("missing value", row=row, column=col)
    try:
        return float(stripped)
    except ValueError:
        raise ParseError(f"non-numeric cell {token!r}", row=row, column=col) from None


def _read_group_labels(path: str, n: int) -> list[str]:
    labels = [line.strip() for line in Path(path).read_text().splitlines() if line.strip()]
    if len(labels) != n:
        raise ParseError(f"groups file has {len(labels)} labels for {n} columns")
    return labels


def _labels_from_sizes(sizes: tuple[int, ...], n: int) -> list[str]:
    if sum(sizes) != n:
        raise InvalidInput(f"group sizes {sizes} do not sum to the {n} columns")
    labels = []
    for g, size in enumerate(sizes, start=1):
        labels.extend([f"group{g}"] * size)
    return labels


def ingest(path: str, options: ParseOptions | None = None) -> tuple[DataMatrix, list[str] | None]:
    """Read a dense matrix from a delimited text file.

    Auto-detects an optional header row (any non-numeric cell in the
    first row) and an optional leading row-ID column, both overridable
    through ``options``.  Missing or non-numeric cells raise ParseError
    with their 1-based location; no imputation is attempted.  Returns
    the matrix (state "raw") and per-column group labels when the
    options provide them, else None.
    """
    opts = options or ParseOptions()
    p = Path(path)
    if not p.exists():
        raise ParseError(f"no such file: {path}")
    delim = opts.delimiter
    if delim is None:
        delim = "\t" if p.suffix.lower() in (".tsv", ".tab") else ","
    with open(p, newline="") as fh:
        rows = [row for row in csv.reader(fh, delimiter=delim) if row]
    if not rows:
        raise ParseError("empty file")

    width = len(rows[0])
    for k, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(f"ragged table: {len(row)} cells, expected {width}", row=k + 1)

    if opts.header == "auto":
        has_header = any(not _is_number(tok) for tok in rows[0])
    elif opts.header in ("yes", "no"):
        has_header = opts.header == "yes"
    else:
        raise InvalidInput("header must be 'auto', 'yes' or 'no'")
    body = rows[1:] if has_header else rows
    first_data_row = 2 if has_header else 1
    if not body:
        raise ParseError("no data rows")

    if opts.row_ids == "auto":
        has_ids = any(not _is_number(row[0]) for row in body)
    elif opts.row_ids in ("yes", "no"):
        has_ids = opts.row_ids == "yes"
    else:
        raise InvalidInput("row_ids must be 'auto', 'yes' or 'no'")
    first_data_col = 2 if has_ids else 1

    values = np.empty((len(body), width - (1 if has_ids else 0)))
    for i, row in enumerate(body):
        for j, token in enumerate(row[first_data_col - 1 :]):
            values[i, j] = _parse_cell(token, first_data_row + i, first_data_col + j)

    matrix = DataMatrix(values, "raw")
    labels: list[str] | None = None
    if opts.groups_file is not None:
        labels = _read_group_labels(opts.groups_file, matrix.n)
    elif opts.group_sizes is not None:
        labels = _labels_from_sizes(opts.group_sizes, matrix.n)
    return matrix, labels


def write_matrix(
    path: str,
    x: DataMatrix,
    header: list[str] | None = None,
    row_ids: list[str] | None = None,
    delimiter: str | None = None,
) -> None:
    """Write a matrix as delimited text; inverse of ingest (repr round-trip)."""
    p = Path(path)
    delim = delimiter
    if delim is None:
        delim = "\t" if p.suffix.lower() in (".tsv", ".tab") else ","
    with open(p, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter=delim)
        if header is not None:
            writer.writerow(([""] if row_ids is not None else []) + list(header))
        for i in range(x.m):
            lead = [row_ids[i]] if row_ids is not None else []
            writer.writerow(lead + [repr(float(v)) for v in x.values[i]])
