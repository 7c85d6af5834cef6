"""Workbook (.xlsx) ingestion via the raw OOXML parts.

Reads sheet order from the workbook part, cell values from each worksheet
part (shared strings, inline strings, numbers, booleans), and merged ranges
from ``mergeCells``.  Merged ranges collapse to a single anchor cell with
spans.  Boolean cells map to Checkbox content; numbers render with their
shortest round-trip decimal form.
"""

from __future__ import annotations

import io
import posixpath
import re
import zipfile
import xml.etree.ElementTree as ET

from ..errors import CorruptWorkbook, UnsupportedFeature
from ..grid import Cell, CellGrid, Checkbox, SheetSet, SourceRef, Text

_OLE_MAGIC = b"\xd0\xcf\x11\xe0"
_CELL_REF = re.compile(r"^([A-Z]+)(\d+)$")


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _col_index(letters: str) -> int:
    n = 0
    for ch in letters:
        n = n * 26 + (ord(ch) - ord("A") + 1)
    return n - 1


def _parse_ref(ref: str) -> tuple[int, int]:
    m = _CELL_REF.match(ref)
    if not m:
        raise CorruptWorkbook(f"bad cell reference {ref!r}")
    return int(m.group(2)) - 1, _col_index(m.group(1))


def _number_text(raw: str) -> str:
    try:
        value = float(raw)
    except ValueError:
        return raw
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _read_xml(zf: zipfile.ZipFile, name: str) -> ET.Element:
    try:
        with zf.open(name) as fh:
            return ET.parse(fh).getroot()
    except KeyError as exc:
        raise CorruptWorkbook(f"workbook part missing: {name}") from exc
    except ET.ParseError as exc:
        raise CorruptWorkbook(f"invalid XML in {name}: {exc}") from exc


def _shared_strings(zf: zipfile.ZipFile) -> list[str]:
    if "xl/sharedStrings.xml" not in zf.namelist():
        return []
    root = _read_xml(zf, "xl/sharedStrings.xml")
    strings = []
    for si in root:
        if _local(si.tag) != "si":
            continue
        parts = [t.text or "" for t in si.iter() if _local(t.tag) == "t"]
        strings.append("".join(parts))
    return strings


def _workbook_sheets(zf: zipfile.ZipFile) -> list[tuple[str, str]]:
    """Sheet (name, part path) pairs in workbook order."""
    wb = _read_xml(zf, "xl/workbook.xml")
    rels = _read_xml(zf, "xl/_rels/workbook.xml.rels")
    targets: dict[str, str] = {}
    for rel in rels:
        rid = rel.get("Id")
        target = rel.get("Target", "")
        if not rid:
            continue
        if target.startswith("/"):
            targets[rid] = target.lstrip("/")
        else:
            targets[rid] = posixpath.normpath(posixpath.join("xl", target))

    sheets: list[tuple[str, str]] = []
    for el in wb.iter():
        if _local(el.tag) != "sheet":
            continue
        name = el.get("name", f"Sheet{len(sheets) + 1}")
        rid = next(
            (v for k, v in el.attrib.items() if _local(k) == "id" and "}" in k),
            el.get("id"),
        )
        part = targets.get(rid or "", "")
        if part:
            sheets.append((name, part))
    if not sheets:
        raise CorruptWorkbook("workbook lists no sheets")
    return sheets


def _cell_content(c: ET.Element, shared: list[str]):
    ctype = c.get("t", "n")
    value_el = next((ch for ch in c if _local(ch.tag) == "v"), None)
    if ctype == "inlineStr":
        is_el = next((ch for ch in c if _local(ch.tag) == "is"), None)
        if is_el is None:
            return None
        text = "".join(t.text or "" for t in is_el.iter() if _local(t.tag) == "t")
        return Text(text) if text.strip() else None
    if value_el is None or value_el.text is None:
        return None
    raw = value_el.text
    if ctype == "s":
        try:
            text = shared[int(raw)]
        except (ValueError, IndexError) as exc:
            raise CorruptWorkbook(f"bad shared string index {raw!r}") from exc
        return Text(text) if text.strip() else None
    if ctype == "b":
        return Checkbox(raw.strip() == "1")
    if ctype in ("str", "e"):
        return Text(raw) if raw.strip() else None
    return Text(_number_text(raw))


def _parse_sheet(zf: zipfile.ZipFile, part: str, name: str, index: int,
                 file_name: str, shared: list[str]) -> CellGrid:
    root = _read_xml(zf, part)
    raw_cells: dict[tuple[int, int], object] = {}
    row_counter = 0
    for row_el in root.iter():
        if _local(row_el.tag) != "row":
            continue
        r = int(row_el.get("r", row_counter + 1)) - 1
        row_counter = r + 1
        col_counter = 0
        for c_el in row_el:
            if _local(c_el.tag) != "c":
                continue
            ref = c_el.get("r")
            if ref:
                rr, cc = _parse_ref(ref)
            else:
                rr, cc = r, col_counter
            col_counter = cc + 1
            content = _cell_content(c_el, shared)
            if content is not None:
                raw_cells[(rr, cc)] = content

    merges: list[tuple[int, int, int, int]] = []
    for el in root.iter():
        if _local(el.tag) != "mergeCell":
            continue
        ref = el.get("ref", "")
        if ":" not in ref:
            continue
        a, b = ref.split(":", 1)
        r1, c1 = _parse_ref(a)
        r2, c2 = _parse_ref(b)
        merges.append((r1, c1, r2, c2))

    cells: list[Cell] = []
    shadowed: set[tuple[int, int]] = set()
    for r1, c1, r2, c2 in merges:
        content = raw_cells.get((r1, c1))
        for rr in range(r1, r2 + 1):
            for cc in range(c1, c2 + 1):
                shadowed.add((rr, cc))
        cells.append(
            Cell(
                row=r1,
                col=c1,
                content=content if content is not None else Text(""),
                row_span=r2 - r1 + 1,
                col_span=c2 - c1 + 1,
            )
        )
    for (rr, cc), content in sorted(raw_cells.items()):
        if (rr, cc) in shadowed:
            continue
        cells.append(Cell(row=rr, col=cc, content=content))

    rows = max([c.row + c.row_span for c in cells], default=0)
    cols = max([c.col + c.col_span for c in cells], default=0)
    return CellGrid(
        rows=rows,
        cols=cols,
        cells=cells,
        title=name,
        source=SourceRef(file_name=file_name, sheet_name=name, sheet_index=index),
    )


def parse_xlsx(data: bytes, file_name: str = "") -> SheetSet:
    """Parse workbook bytes into one grid per sheet, in workbook order."""
    if data[:4] == _OLE_MAGIC:
        raise UnsupportedFeature("encrypted or legacy OLE workbook")
    try:
        zf = zipfile.ZipFile(io.BytesIO(data))
    except zipfile.BadZipFile as exc:
        raise CorruptWorkbook(f"not a workbook archive: {exc}") from exc

    with zf:
        shared = _shared_strings(zf)
        sheets = []
        for index, (name, part) in enumerate(_workbook_sheets(zf)):
            sheets.append(
                (name, _parse_sheet(zf, part, name, index, file_name, shared))
            )
    return SheetSet(sheets=sheets)
