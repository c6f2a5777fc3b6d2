"""Raw file loading and the physical/logical line model.

Files are read as bytes and held as latin-1 text so that one character is
always one byte: columns are byte columns and encoding never changes
offsets.  Terminators are preserved verbatim; reassembling the physical
lines reproduces the input bytes exactly.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field

LF = "LF"
CRLF = "CRLF"
CR = "CR"
NO_TERMINATOR = "none"

TERMINATOR_TEXT = {LF: "\n", CRLF: "\r\n", CR: "\r", NO_TERMINATOR: ""}


@dataclass(frozen=True, order=True)
class SourcePos:
    """1-based physical (line, byte column); ordered lexicographically."""

    line: int
    column: int


@dataclass(slots=True)
class PhysicalLine:
    number: int
    content: str
    terminator: str  # LF | CRLF | CR | none

    @property
    def terminator_text(self) -> str:
        return TERMINATOR_TEXT[self.terminator]


@dataclass(slots=True)
class LogicalLine:
    first_line: int
    last_line: int
    spliced: bool


@dataclass
class SourceFile:
    path: str
    data: str  # latin-1 text; len(data) == byte count
    lines: list[PhysicalLine] = field(default_factory=list)
    line_offsets: list[int] = field(default_factory=list)

    def pos_at(self, offset: int) -> SourcePos:
        """Map a byte offset to a 1-based (line, column)."""
        if not self.line_offsets:
            return SourcePos(1, offset + 1)
        idx = bisect_right(self.line_offsets, offset) - 1
        if idx < 0:
            idx = 0
        return SourcePos(idx + 1, offset - self.line_offsets[idx] + 1)

    def offset_of(self, line: int, column: int) -> int:
        return self.line_offsets[line - 1] + column - 1


def _split_lines(data: str) -> tuple[list[PhysicalLine], list[int]]:
    lines: list[PhysicalLine] = []
    offsets: list[int] = []
    n = len(data)
    i = 0
    while i < n:
        offsets.append(i)
        j = i
        while j < n and data[j] != "\n" and data[j] != "\r":
            j += 1
        content = data[i:j]
        if j >= n:
            term = NO_TERMINATOR
            i = j
        elif data[j] == "\n":
            term = LF
            i = j + 1
        elif j + 1 < n and data[j + 1] == "\n":
            term = CRLF
            i = j + 2
        else:
            term = CR
            i = j + 1
        lines.append(PhysicalLine(len(lines) + 1, content, term))
    return lines, offsets


def from_text(path: str, data: str) -> SourceFile:
    """Build a SourceFile from already-decoded latin-1 text."""
    lines, offsets = _split_lines(data)
    return SourceFile(path=path, data=data, lines=lines, line_offsets=offsets)


def from_bytes(path: str, raw: bytes) -> SourceFile:
    return from_text(path, raw.decode("latin-1"))


def load_source(path: str) -> SourceFile:
    """Read a file verbatim; raises OSError for unreadable paths."""
    with open(path, "rb") as handle:
        raw = handle.read()
    return from_bytes(path, raw)


def reconstruct(sf: SourceFile) -> str:
    """Concatenate line contents and terminators (round-trip check)."""
    return "".join(ln.content + ln.terminator_text for ln in sf.lines)


def splice_lines(sf: SourceFile) -> list[LogicalLine]:
    """Join physical lines ended by a backslash into logical lines."""
    logical: list[LogicalLine] = []
    i = 0
    count = len(sf.lines)
    while i < count:
        first = i
        spliced = False
        while (
            i < count
            and sf.lines[i].content.endswith("\\")
            and sf.lines[i].terminator != NO_TERMINATOR
            and i + 1 < count
        ):
            spliced = True
            i += 1
        logical.append(LogicalLine(first + 1, i + 1, spliced))
        i += 1
    return logical


def trailing_continuation(sf: SourceFile) -> SourcePos | None:
    """Position of a backslash continuation with no successor line, if any."""
    if not sf.lines:
        return None
    last = sf.lines[-1]
    if last.content.endswith("\\"):
        return SourcePos(last.number, len(last.content))
    return None
