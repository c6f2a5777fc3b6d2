"""Lossless C99 tokenizer: tokens with attached trivia.

Concatenating every token's leading trivia plus its lexeme (ending with
the EndOfFile token) reproduces the file bytes exactly.  The raw scan is
done by barrc._scanner or, when built, its Cython-compiled twin
barrc._scanner_c; both expose the same scan() contract.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .source import SourceFile, SourcePos

try:
    from . import _scanner_c as _impl  # compiled twin, built on demand
except ImportError:  # pragma: no cover - depends on local build
    from . import _scanner as _impl

from . import _scanner as _pure

SCANNER_COMPILED = bool(getattr(_impl, "COMPILED", False)) or _impl is not _pure

# Token kinds
KEYWORD = "keyword"
IDENT = "ident"
INT_CONST = "int"
FLOAT_CONST = "float"
CHAR_CONST = "char"
STRING = "string"
PUNCT = "punct"
PP_HASH = "pp-hash"
EOF = "eof"

CONSTANT_KINDS = frozenset({INT_CONST, FLOAT_CONST, CHAR_CONST, STRING})

# Trivia kinds
SPACES = "spaces"
LINE_COMMENT = "line-comment"
BLOCK_COMMENT = "block-comment"
NEWLINE = "newline"
FORMFEED = "formfeed"
OTHER_CONTROL = "other-control"
SPLICE = "splice"

COMMENT_KINDS = frozenset({LINE_COMMENT, BLOCK_COMMENT})

_TRIVIA_KIND = {
    _pure.SPACES: SPACES,
    _pure.LINE_COMMENT: LINE_COMMENT,
    _pure.BLOCK_COMMENT: BLOCK_COMMENT,
    _pure.NEWLINE: NEWLINE,
    _pure.FORMFEED: FORMFEED,
    _pure.OTHER_CONTROL: OTHER_CONTROL,
    _pure.SPLICE: SPLICE,
}

C99_KEYWORDS = frozenset(
    """
    auto break case char const continue default do double else enum extern
    float for goto if inline int long register restrict return short signed
    sizeof static struct switch typedef union unsigned void volatile while
    _Bool _Complex _Imaginary
    """.split()
)

DIGRAPHS = {"<:": "[", ":>": "]", "<%": "{", "%>": "}", "%:": "#", "%:%:": "##"}

_SPLICE_RE = re.compile(r"\\(?:\r\n|\n|\r)")

_ERR_MESSAGES = {
    _pure.ERR_BLOCK_COMMENT: "unterminated block comment",
    _pure.ERR_STRING: "unterminated string literal",
    _pure.ERR_CHAR: "unterminated character constant",
}


@dataclass(slots=True)
class Trivia:
    kind: str
    text: str
    start: SourcePos
    end: SourcePos
    start_offset: int
    end_offset: int


@dataclass(slots=True)
class Token:
    kind: str
    lexeme: str  # raw source text, interior splices included
    value: str  # de-spliced text used for classification/comparison
    symbol: str  # normalized punctuator (digraphs mapped); == value otherwise
    start: SourcePos
    end: SourcePos
    start_offset: int
    end_offset: int
    at_line_start: bool
    leading_trivia: list[Trivia] = field(default_factory=list)
    suffix: str = ""  # lowercased trailing letters of a numeric constant

    @property
    def line(self) -> int:
        return self.start.line

    @property
    def col(self) -> int:
        return self.start.column

    def is_kw(self, name: str) -> bool:
        return self.kind == KEYWORD and self.value == name

    def is_sym(self, symbol: str) -> bool:
        return (self.kind == PUNCT or self.kind == PP_HASH) and self.symbol == symbol


@dataclass(slots=True)
class LexError:
    message: str
    pos: SourcePos


def _despliced(text: str) -> str:
    if "\\" in text:
        return _SPLICE_RE.sub("", text)
    return text


def _classify_number(value: str) -> tuple[str, str]:
    lower = value.lower()
    if lower.startswith("0x"):
        is_float = "p" in lower
        pattern = r"[fl]+$" if is_float else r"[ul]+$"
        m = re.search(pattern, lower[2:])
    else:
        is_float = "." in lower or "e" in lower
        m = re.search(r"[a-z]+$", lower)
    suffix = m.group(0) if m else ""
    return (FLOAT_CONST if is_float else INT_CONST), suffix


def tokenize_with_errors(sf: SourceFile) -> tuple[list[Token], list[LexError]]:
    items, raw_errors = _impl.scan(sf.data)
    tokens: list[Token] = []
    pending: list[Trivia] = []
    at_line_start = True
    data = sf.data
    for kind_code, start, end in items:
        tkind = _TRIVIA_KIND.get(kind_code)
        if tkind is not None:
            pending.append(
                Trivia(tkind, data[start:end], sf.pos_at(start), sf.pos_at(end), start, end)
            )
            if tkind == NEWLINE:
                at_line_start = True
            continue
        lexeme = data[start:end]
        value = _despliced(lexeme)
        suffix = ""
        if kind_code == _pure.IDENT:
            kind = KEYWORD if value in C99_KEYWORDS else IDENT
            symbol = value
        elif kind_code == _pure.NUMBER:
            kind, suffix = _classify_number(value)
            symbol = value
        elif kind_code == _pure.CHAR_CONST:
            kind, symbol = CHAR_CONST, value
        elif kind_code == _pure.STRING:
            kind, symbol = STRING, value
        else:
            symbol = DIGRAPHS.get(value, value)
            kind = PP_HASH if symbol == "#" and at_line_start else PUNCT
        tokens.append(
            Token(
                kind=kind,
                lexeme=lexeme,
                value=value,
                symbol=symbol,
                start=sf.pos_at(start),
                end=sf.pos_at(end),
                start_offset=start,
                end_offset=end,
                at_line_start=at_line_start,
                leading_trivia=pending,
                suffix=suffix,
            )
        )
        pending = []
        at_line_start = False
    size = len(data)
    eof_pos = sf.pos_at(size)
    tokens.append(
        Token(
            kind=EOF,
            lexeme="",
            value="",
            symbol="",
            start=eof_pos,
            end=eof_pos,
            start_offset=size,
            end_offset=size,
            at_line_start=at_line_start,
            leading_trivia=pending,
        )
    )
    errors = [LexError(_ERR_MESSAGES[code], sf.pos_at(off)) for code, off in raw_errors]
    return tokens, errors


def tokenize(sf: SourceFile) -> list[Token]:
    return tokenize_with_errors(sf)[0]


def round_trip(tokens: list[Token]) -> str:
    """Reassemble source text from trivia and lexemes."""
    parts: list[str] = []
    for tok in tokens:
        for trivia in tok.leading_trivia:
            parts.append(trivia.text)
        parts.append(tok.lexeme)
    return "".join(parts)


# classify_operator_context results
UNARY_OP = "unary"
BINARY_OP = "binary"
DECL_POINTER = "decl-pointer"
DECL_ADDRESS = "decl-address"
OTHER = "other"

_AMBIGUOUS = frozenset({"+", "-", "*", "&"})
_UNARY_ONLY = frozenset({"++", "--", "!", "~"})
_BINARY_LEFT_PUNCT = frozenset({")", "]"})


def classify_operator_context(
    tokens: list[Token], index: int, declarator_marks: frozenset[int] | set[int] = frozenset()
) -> str:
    """Classify +,-,*,&,++,--,!,~ at tokens[index] from its left context.

    declarator_marks holds token indices the parser identified as
    declarator pointer/address punctuation.
    """
    tok = tokens[index]
    if tok.kind != PUNCT:
        return OTHER
    sym = tok.symbol
    if sym in _UNARY_ONLY:
        return UNARY_OP
    if sym not in _AMBIGUOUS:
        return OTHER
    if index in declarator_marks:
        return DECL_POINTER if sym == "*" else DECL_ADDRESS
    prev = tokens[index - 1] if index > 0 else None
    if prev is not None and (
        prev.kind in (IDENT, INT_CONST, FLOAT_CONST, CHAR_CONST, STRING)
        or (prev.kind == PUNCT and prev.symbol in _BINARY_LEFT_PUNCT)
    ):
        return BINARY_OP
    return UNARY_OP
