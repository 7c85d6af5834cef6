"""Markdown ingestion: GFM pipe tables only, alignment rows discarded."""

from __future__ import annotations

import re

from ..errors import InvalidEncoding, NoTableFound
from ..grid import Cell, CellGrid, SourceRef, Text

_ALIGN_CELL = re.compile(r"^\s*:?-+:?\s*$")


def _split_row(line: str) -> list[str]:
    stripped = line.strip()
    if stripped.startswith("|"):
        stripped = stripped[1:]
    if stripped.endswith("|"):
        stripped = stripped[:-1]
    # split on unescaped pipes
    fields = re.split(r"(?<!\\)\|", stripped)
    return [f.replace("\\|", "|").strip() for f in fields]


def _is_alignment_row(fields: list[str]) -> bool:
    return bool(fields) and all(_ALIGN_CELL.match(f) for f in fields)


def parse_md(data: bytes, file_name: str = "") -> CellGrid:
    """Parse the first pipe table found in a markdown document."""
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise InvalidEncoding(f"input is not UTF-8: {exc}") from exc

    lines = text.splitlines()
    table_rows: list[list[str]] = []
    in_table = False
    for line in lines:
        if "|" in line and line.strip():
            fields = _split_row(line)
            if _is_alignment_row(fields):
                in_table = True
                continue
            table_rows.append(fields)
            in_table = True
        elif in_table:
            break

    if not table_rows:
        raise NoTableFound("no pipe table in markdown input")

    rows = len(table_rows)
    cols = max(len(r) for r in table_rows)
    cells = [
        Cell(row=r, col=c, content=Text(value))
        for r, rec in enumerate(table_rows)
        for c, value in enumerate(rec)
        if value != ""
    ]
    return CellGrid(
        rows=rows, cols=cols, cells=cells, source=SourceRef(file_name=file_name)
    )
