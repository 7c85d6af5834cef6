"""Author minimal .xlsx workbooks in memory for parser tests."""

from __future__ import annotations

import io
import zipfile

_CONTENT_TYPES = """<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types">
<Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/>
<Default Extension="xml" ContentType="application/xml"/>
<Override PartName="/xl/workbook.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.sheet.main+xml"/>
{overrides}
<Override PartName="/xl/sharedStrings.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.sharedStrings+xml"/>
</Types>"""

_ROOT_RELS = """<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">
<Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/officeDocument" Target="xl/workbook.xml"/>
</Relationships>"""


def _col_letter(col: int) -> str:
    out = ""
    col += 1
    while col:
        col, rem = divmod(col - 1, 26)
        out = chr(ord("A") + rem) + out
    return out


def _ref(row: int, col: int) -> str:
    return f"{_col_letter(col)}{row + 1}"


def make_xlsx(sheets: list[tuple[str, list[list[object]], list[str]]]) -> bytes:
    """Build workbook bytes.

    ``sheets`` holds (name, rows, merge_refs) triples.  Row values: str goes
    through sharedStrings, int/float are stored as numbers, bool as boolean
    cells, None is skipped.  ``merge_refs`` uses A1 notation like "A1:B1".
    """
    shared: list[str] = []

    def shared_index(text: str) -> int:
        try:
            return shared.index(text)
        except ValueError:
            shared.append(text)
            return len(shared) - 1

    sheet_parts = []
    for name, rows, merges in sheets:
        row_xml = []
        for r, row in enumerate(rows):
            cells_xml = []
            for c, value in enumerate(row):
                if value is None:
                    continue
                ref = _ref(r, c)
                if isinstance(value, bool):
                    cells_xml.append(
                        f'<c r="{ref}" t="b"><v>{1 if value else 0}</v></c>'
                    )
                elif isinstance(value, (int, float)):
                    cells_xml.append(f'<c r="{ref}"><v>{value}</v></c>')
                else:
                    idx = shared_index(str(value))
                    cells_xml.append(f'<c r="{ref}" t="s"><v>{idx}</v></c>')
            row_xml.append(f'<row r="{r + 1}">{"".join(cells_xml)}</row>')
        merge_xml = ""
        if merges:
            entries = "".join(f'<mergeCell ref="{m}"/>' for m in merges)
            merge_xml = f'<mergeCells count="{len(merges)}">{entries}</mergeCells>'
        sheet_parts.append(
            '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
            '<worksheet xmlns="http://schemas.openxmlformats.org/'
            'spreadsheetml/2006/main">'
            f'<sheetData>{"".join(row_xml)}</sheetData>{merge_xml}</worksheet>'
        )

    ns_main = "http://schemas.openxmlformats.org/spreadsheetml/2006/main"
    ns_r = "http://schemas.openxmlformats.org/officeDocument/2006/relationships"
    sheet_entries = "".join(
        f'<sheet name="{name}" sheetId="{i + 1}" r:id="rId{i + 1}"/>'
        for i, (name, _, _) in enumerate(sheets)
    )
    workbook = (
        '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
        f'<workbook xmlns="{ns_main}" xmlns:r="{ns_r}">'
        f"<sheets>{sheet_entries}</sheets></workbook>"
    )
    rel_entries = "".join(
        f'<Relationship Id="rId{i + 1}" Type="{ns_r}/worksheet" '
        f'Target="worksheets/sheet{i + 1}.xml"/>'
        for i in range(len(sheets))
    )
    rel_entries += (
        f'<Relationship Id="rId{len(sheets) + 1}" Type="{ns_r}/sharedStrings" '
        'Target="sharedStrings.xml"/>'
    )
    workbook_rels = (
        '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
        '<Relationships xmlns="http://schemas.openxmlformats.org/'
        f'package/2006/relationships">{rel_entries}</Relationships>'
    )
    shared_entries = "".join(
        f"<si><t xml:space=\"preserve\">{s}</t></si>" for s in shared
    )
    shared_xml = (
        '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
        f'<sst xmlns="{ns_main}" count="{len(shared)}" '
        f'uniqueCount="{len(shared)}">{shared_entries}</sst>'
    )
    overrides = "\n".join(
        f'<Override PartName="/xl/worksheets/sheet{i + 1}.xml" '
        'ContentType="application/vnd.openxmlformats-officedocument.'
        'spreadsheetml.worksheet+xml"/>'
        for i in range(len(sheets))
    )

    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
        zf.writestr("[Content_Types].xml", _CONTENT_TYPES.format(overrides=overrides))
        zf.writestr("_rels/.rels", _ROOT_RELS)
        zf.writestr("xl/workbook.xml", workbook)
        zf.writestr("xl/_rels/workbook.xml.rels", workbook_rels)
        zf.writestr("xl/sharedStrings.xml", shared_xml)
        for i, part in enumerate(sheet_parts):
            zf.writestr(f"xl/worksheets/sheet{i + 1}.xml", part)
    return buf.getvalue()
