"""HTML table ingestion built on the stdlib parser.

Handles rowspan/colspan, nested tables (becoming NestedGrid content),
checkbox inputs, and the usual tag-soup recoveries (implicitly closed
cells and rows).  Only the first top-level table is returned.
"""

from __future__ import annotations

import re
from html.parser import HTMLParser
from typing import Optional

from ..errors import MalformedMarkup, NoTableFound, InvalidEncoding
from ..grid import Cell, CellGrid, Checkbox, NestedGrid, SourceRef, Text


class _CellDraft:
    __slots__ = ("rowspan", "colspan", "chunks", "nested", "checkbox")

    def __init__(self, rowspan: int, colspan: int):
        self.rowspan = rowspan
        self.colspan = colspan
        self.chunks: list[str] = []
        self.nested: list[CellGrid] = []
        self.checkbox: Optional[bool] = None

    def text(self) -> str:
        return re.sub(r"\s+", " ", "".join(self.chunks)).strip()


class _TableDraft:
    def __init__(self) -> None:
        self.rows: list[list[_CellDraft]] = []
        self.open_cell: Optional[_CellDraft] = None


def _int_attr(attrs: dict[str, Optional[str]], name: str) -> int:
    raw = attrs.get(name)
    if raw is None:
        return 1
    try:
        value = int(raw.strip())
    except (ValueError, AttributeError):
        return 1
    return max(1, value)


class _TableHTMLParser(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.stack: list[_TableDraft] = []
        self.toplevel: list[CellGrid] = []

    # -- helpers ------------------------------------------------------------

    def _close_cell(self) -> None:
        if self.stack:
            self.stack[-1].open_cell = None

    def _require_table(self, tag: str) -> _TableDraft:
        if not self.stack:
            raise MalformedMarkup(f"<{tag}> outside any table")
        return self.stack[-1]

    # -- events ---------------------------------------------------------------

    def handle_starttag(self, tag, attrs):
        a = dict(attrs)
        if tag == "table":
            self.stack.append(_TableDraft())
        elif tag == "tr":
            frame = self._require_table(tag)
            frame.open_cell = None
            frame.rows.append([])
        elif tag in ("td", "th"):
            frame = self._require_table(tag)
            if not frame.rows:
                frame.rows.append([])
            draft = _CellDraft(_int_attr(a, "rowspan"), _int_attr(a, "colspan"))
            frame.rows[-1].append(draft)
            frame.open_cell = draft
        elif tag == "input" and self.stack and self.stack[-1].open_cell:
            if (a.get("type") or "").lower() == "checkbox":
                self.stack[-1].open_cell.checkbox = "checked" in a
        elif tag == "br" and self.stack and self.stack[-1].open_cell:
            self.stack[-1].open_cell.chunks.append(" ")

    def handle_endtag(self, tag):
        if tag == "table":
            if not self.stack:
                return  # stray close tag: recoverable
            frame = self.stack.pop()
            grid = _assemble(frame)
            if self.stack and self.stack[-1].open_cell is not None:
                self.stack[-1].open_cell.nested.append(grid)
            else:
                self.toplevel.append(grid)
        elif tag in ("td", "th", "tr") and self.stack:
            self._close_cell()

    def handle_data(self, data):
        if self.stack and self.stack[-1].open_cell is not None:
            self.stack[-1].open_cell.chunks.append(data)

    def finish(self) -> None:
        # unclosed tables at EOF: close them innermost-first
        while self.stack:
            frame = self.stack.pop()
            grid = _assemble(frame)
            if self.stack and self.stack[-1].open_cell is not None:
                self.stack[-1].open_cell.nested.append(grid)
            else:
                self.toplevel.append(grid)


def _draft_content(draft: _CellDraft):
    if draft.nested:
        return NestedGrid(draft.nested[0])
    if draft.checkbox is not None:
        return Checkbox(draft.checkbox)
    text = draft.text()
    return Text(text) if text else None


def _assemble(frame: _TableDraft) -> CellGrid:
    occupied: set[tuple[int, int]] = set()
    placed: list[tuple[int, int, _CellDraft, int, int]] = []
    n_rows = len(frame.rows)
    for r, row in enumerate(frame.rows):
        c = 0
        for draft in row:
            while (r, c) in occupied:
                c += 1
            rs = min(draft.rowspan, max(1, n_rows - r))
            cs = draft.colspan
            for rr in range(r, r + rs):
                for cc in range(c, c + cs):
                    occupied.add((rr, cc))
            placed.append((r, c, draft, rs, cs))
            c += cs

    rows = max((r + 1 for r, _ in occupied), default=0)
    cols = max((c + 1 for _, c in occupied), default=0)
    cells = []
    for r, c, draft, rs, cs in placed:
        content = _draft_content(draft)
        if content is None and rs == 1 and cs == 1:
            continue
        cells.append(
            Cell(row=r, col=c, content=content or Text(""), row_span=rs, col_span=cs)
        )
    return CellGrid(rows=rows, cols=cols, cells=cells)


def parse_html(data: bytes, file_name: str = "") -> CellGrid:
    """Parse the first top-level table of an HTML document."""
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise InvalidEncoding(f"input is not UTF-8: {exc}") from exc

    parser = _TableHTMLParser()
    parser.feed(text)
    parser.close()
    parser.finish()
    if not parser.toplevel:
        raise NoTableFound("document contains no table element")
    grid = parser.toplevel[0]
    grid.source = SourceRef(file_name=file_name)
    return grid
