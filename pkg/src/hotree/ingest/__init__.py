"""Raw table ingestion: every parser yields the uniform CellGrid model."""

from __future__ import annotations

from pathlib import PurePath

from ..errors import UnsupportedFormat
from ..grid import CellGrid, SheetSet, SourceRef
from .csv_parser import parse_csv
from .html_parser import parse_html
from .markdown_parser import parse_md
from .xlsx_parser import parse_xlsx

TABLE_EXTENSIONS = {".csv", ".xlsx", ".html", ".htm", ".md"}
IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg"}


def parse_table(name: str, data: bytes) -> SheetSet:
    """Dispatch on file extension; single-grid formats become one-sheet sets."""
    ext = PurePath(name).suffix.lower()
    stem = PurePath(name).stem
    if ext == ".csv":
        grid = parse_csv(data, file_name=name)
    elif ext in (".html", ".htm"):
        grid = parse_html(data, file_name=name)
    elif ext == ".md":
        grid = parse_md(data, file_name=name)
    elif ext == ".xlsx":
        return parse_xlsx(data, file_name=name)
    else:
        raise UnsupportedFormat(f"unsupported table format: {ext or name!r}")
    return SheetSet(sheets=[(stem, grid)])


__all__ = [
    "IMAGE_EXTENSIONS",
    "TABLE_EXTENSIONS",
    "parse_csv",
    "parse_html",
    "parse_md",
    "parse_table",
    "parse_xlsx",
]
