"""Uniform 2-D cell model shared by every parser.

A grid stores only explicit cells (non-empty content, or an anchor that
carries a merged span).  Coordinates not covered by any cell extent are
implicitly empty; ``cell_at`` materializes them on demand.  A merged region
is exactly one cell whose ``row_span``/``col_span`` exceed 1 -- never a block
of duplicated or null cells.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .errors import NestingTooDeep, StructureViolation

MAX_NESTING_DEPTH = 3


@dataclass(frozen=True)
class SourceRef:
    """Where a grid came from: file name plus optional sheet."""

    file_name: str = ""
    sheet_name: Optional[str] = None
    sheet_index: Optional[int] = None

    def to_dict(self) -> dict:
        d: dict = {"file_name": self.file_name}
        if self.sheet_name is not None:
            d["sheet_name"] = self.sheet_name
        if self.sheet_index is not None:
            d["sheet_index"] = self.sheet_index
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SourceRef":
        return cls(
            file_name=d.get("file_name", ""),
            sheet_name=d.get("sheet_name"),
            sheet_index=d.get("sheet_index"),
        )


@dataclass(frozen=True)
class Text:
    value: str


@dataclass(frozen=True)
class Checkbox:
    checked: bool


@dataclass(frozen=True)
class ImageRef:
    resource_id: str


@dataclass(frozen=True)
class NestedGrid:
    grid: "CellGrid"


@dataclass(frozen=True)
class Empty:
    pass


CellContent = Union[Text, Checkbox, ImageRef, NestedGrid, Empty]

EMPTY = Empty()


def content_text(content: CellContent) -> str:
    """Single-line text stand-in for any cell content."""
    if isinstance(content, Text):
        return content.value
    if isinstance(content, Checkbox):
        return "[x]" if content.checked else "[ ]"
    if isinstance(content, ImageRef):
        return f"[image:{content.resource_id}]"
    if isinstance(content, NestedGrid):
        return "[table]"
    return ""


def is_empty(content: CellContent) -> bool:
    return isinstance(content, Empty) or (
        isinstance(content, Text) and content.value.strip() == ""
    )


@dataclass(frozen=True)
class Cell:
    row: int
    col: int
    content: CellContent = EMPTY
    row_span: int = 1
    col_span: int = 1

    def extent(self) -> Iterator[tuple[int, int]]:
        for r in range(self.row, self.row + self.row_span):
            for c in range(self.col, self.col + self.col_span):
                yield r, c

    @property
    def merged(self) -> bool:
        return self.row_span > 1 or self.col_span > 1


@dataclass
class CellGrid:
    rows: int
    cols: int
    cells: list[Cell] = field(default_factory=list)
    title: Optional[str] = None
    source: SourceRef = field(default_factory=SourceRef)

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        """Check bounds, span overlap, and nesting depth; raise on violation."""
        covered: dict[tuple[int, int], Cell] = {}
        for cell in self.cells:
            if cell.row_span < 1 or cell.col_span < 1:
                raise StructureViolation(
                    f"cell ({cell.row},{cell.col}) has non-positive span"
                )
            if not (0 <= cell.row and cell.row + cell.row_span <= self.rows):
                raise StructureViolation(
                    f"cell ({cell.row},{cell.col}) row extent outside grid"
                )
            if not (0 <= cell.col and cell.col + cell.col_span <= self.cols):
                raise StructureViolation(
                    f"cell ({cell.row},{cell.col}) col extent outside grid"
                )
            for coord in cell.extent():
                if coord in covered:
                    raise StructureViolation(
                        f"cells overlap at {coord}"
                    )
                covered[coord] = cell
        _check_depth(self, 1)

    def cell_at(self, row: int, col: int) -> Cell:
        """The cell covering (row, col); implicit Empty when uncovered."""
        for cell in self.cells:
            if cell.row <= row < cell.row + cell.row_span and \
               cell.col <= col < cell.col + cell.col_span:
                return cell
        return Cell(row=row, col=col)

    def anchor_at(self, row: int, col: int) -> Optional[Cell]:
        """The explicit cell anchored exactly at (row, col), if any."""
        for cell in self.cells:
            if cell.row == row and cell.col == col:
                return cell
        return None

    def coverage(self) -> dict[tuple[int, int], Cell]:
        out: dict[tuple[int, int], Cell] = {}
        for cell in self.cells:
            for coord in cell.extent():
                out[coord] = cell
        return out

    def non_empty_cells(self) -> list[Cell]:
        return [c for c in self.cells if not is_empty(c.content)]


@dataclass
class SheetSet:
    sheets: list[tuple[str, CellGrid]]

    def __post_init__(self) -> None:
        names = [name for name, _ in self.sheets]
        if len(set(names)) != len(names):
            raise StructureViolation("duplicate sheet names in sheet set")


def _check_depth(grid: CellGrid, depth: int) -> None:
    if depth > MAX_NESTING_DEPTH:
        raise NestingTooDeep(
            f"nested subtables exceed depth {MAX_NESTING_DEPTH}"
        )
    for cell in grid.cells:
        if isinstance(cell.content, NestedGrid):
            _check_depth(cell.content.grid, depth + 1)


def _escape(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace("\t", "\\t")
        .replace("\r", "\\r")
        .replace("\n", "\\n")
    )


def render_grid_text(grid: CellGrid, indent: int = 0) -> str:
    """Deterministic line-oriented rendering of a grid.

    One line per row, cells tab-separated.  Merged cells print once at their
    anchor with an ``[RxC]`` span suffix; shadowed coordinates stay blank.
    Nested grids render beneath their row, indented one tab level.  Identical
    grids always produce byte-identical text.
    """
    anchors = {(c.row, c.col): c for c in grid.cells}
    prefix = "\t" * indent
    lines: list[str] = []
    for r in range(grid.rows):
        fields = []
        nested_after: list[CellGrid] = []
        for c in range(grid.cols):
            cell = anchors.get((r, c))
            if cell is None:
                fields.append("")
                continue
            text = _escape(content_text(cell.content))
            if cell.merged:
                text += f"[{cell.row_span}x{cell.col_span}]"
            fields.append(text)
            if isinstance(cell.content, NestedGrid):
                nested_after.append(cell.content.grid)
        lines.append(prefix + "\t".join(fields) + "\n")
        for nested in nested_after:
            lines.append(render_grid_text(nested, indent + 1))
    return "".join(lines)
