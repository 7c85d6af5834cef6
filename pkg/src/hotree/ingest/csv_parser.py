"""CSV ingestion: plain fields, no merged spans."""

from __future__ import annotations

import csv
import io

from ..errors import EmptyInput, InvalidEncoding
from ..grid import Cell, CellGrid, SourceRef, Text


def parse_csv(data: bytes, file_name: str = "") -> CellGrid:
    """Parse CSV bytes into a grid.

    Rows map to grid rows, fields to columns; short rows are padded with
    implicit empties.  UTF-8 input with an optional BOM is accepted.
    """
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise InvalidEncoding(f"input is not UTF-8: {exc}") from exc

    records = list(csv.reader(io.StringIO(text)))
    if not any(f.strip() for rec in records for f in rec):
        raise EmptyInput("no non-blank lines in CSV input")

    rows = len(records)
    cols = max(len(rec) for rec in records)
    cells = [
        Cell(row=r, col=c, content=Text(value))
        for r, rec in enumerate(records)
        for c, value in enumerate(rec)
        if value.strip() != ""
    ]
    return CellGrid(
        rows=rows, cols=cols, cells=cells, source=SourceRef(file_name=file_name)
    )
