"""Preprocessor structure without macro expansion.

Recognizes directives, macro definitions, include references and header
guards, and selects a single analyzable branch of conditional blocks
under the configured macro environment (undefined names evaluate to 0,
defined(X) is false for unknown X).  Inactive ranges stay lexed; they
are only excluded from structural parsing.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from . import lexer
from .lexer import Token
from .source import SourceFile, SourcePos

INCLUDE = "include"
DEFINE = "define"
UNDEF = "undef"
IF = "if"
IFDEF = "ifdef"
IFNDEF = "ifndef"
ELIF = "elif"
ELSE = "else"
ENDIF = "endif"
PRAGMA = "pragma"
ERROR = "error"
LINE_MARKER = "line"
OTHER = "other"

_KIND_BY_NAME = {
    "include": INCLUDE,
    "define": DEFINE,
    "undef": UNDEF,
    "if": IF,
    "ifdef": IFDEF,
    "ifndef": IFNDEF,
    "elif": ELIF,
    "else": ELSE,
    "endif": ENDIF,
    "pragma": PRAGMA,
    "error": ERROR,
    "warning": OTHER,
    "line": LINE_MARKER,
}

ANGLE = "angle"
QUOTE = "quote"


@dataclass(slots=True)
class Directive:
    kind: str
    tokens: list[Token]  # whole logical line, '#' first
    hash_column: int
    first_line: int
    last_line: int
    active: bool = True  # enclosing conditional context is active

    @property
    def hash_token(self) -> Token:
        return self.tokens[0]

    @property
    def keyword_token(self) -> Token | None:
        return self.tokens[1] if len(self.tokens) > 1 else None


@dataclass(slots=True)
class MacroDef:
    name: str
    is_function_like: bool
    params: list[str]
    body: list[Token]
    name_token: Token
    directive: Directive


@dataclass(slots=True)
class IncludeRef:
    style: str  # angle | quote
    path_text: str
    resolved: str | None
    directive: Directive


@dataclass(slots=True)
class HeaderGuard:
    macro_name: str
    ifndef: Directive
    define: Directive
    endif: Directive
    endif_has_comment: bool


@dataclass
class CppView:
    directives: list[Directive] = field(default_factory=list)
    macros: list[MacroDef] = field(default_factory=list)
    includes: list[IncludeRef] = field(default_factory=list)
    guard: HeaderGuard | None = None
    active_lines: list[bool] = field(default_factory=list)  # 1-based; [0] unused
    errors: list[tuple[str, SourcePos]] = field(default_factory=list)


def _directive_ranges(tokens: list[Token]) -> list[tuple[int, int]]:
    """Index ranges [start, end) of directive logical lines."""
    ranges: list[tuple[int, int]] = []
    i = 0
    n = len(tokens)
    while i < n:
        tok = tokens[i]
        if tok.kind == lexer.PP_HASH:
            j = i + 1
            while j < n and tokens[j].kind != lexer.EOF and not tokens[j].at_line_start:
                j += 1
            ranges.append((i, j))
            i = j
        else:
            i += 1
    return ranges


def _parse_one(tokens: list[Token], start: int, end: int, errors) -> Directive:
    toks = tokens[start:end]
    hash_tok = toks[0]
    kind = OTHER
    if len(toks) > 1:
        name_tok = toks[1]
        if name_tok.kind in (lexer.IDENT, lexer.KEYWORD):
            kind = _KIND_BY_NAME.get(name_tok.value, OTHER)
            if kind == OTHER and name_tok.value not in _KIND_BY_NAME:
                errors.append(("unknown preprocessor directive", name_tok.start))
        else:
            errors.append(("malformed preprocessor directive", name_tok.start))
    # a bare '#' line is a valid null directive; keep kind OTHER silently
    return Directive(
        kind=kind,
        tokens=toks,
        hash_column=hash_tok.start.column,
        first_line=toks[0].start.line,
        last_line=toks[-1].end.line,
    )


def _extract_macro(d: Directive, errors) -> MacroDef | None:
    toks = d.tokens
    if len(toks) < 3 or toks[2].kind not in (lexer.IDENT, lexer.KEYWORD):
        errors.append(("malformed #define", toks[-1].start))
        return None
    name_tok = toks[2]
    rest = toks[3:]
    is_function_like = bool(rest) and rest[0].is_sym("(") and not rest[0].leading_trivia
    params: list[str] = []
    body = rest
    if is_function_like:
        i = 1
        while i < len(rest) and not rest[i].is_sym(")"):
            if rest[i].kind in (lexer.IDENT, lexer.KEYWORD) or rest[i].is_sym("..."):
                params.append(rest[i].value or rest[i].symbol)
            i += 1
        body = rest[i + 1 :]
    return MacroDef(
        name=name_tok.value,
        is_function_like=is_function_like,
        params=params,
        body=body,
        name_token=name_tok,
        directive=d,
    )


def _extract_include(
    d: Directive, sf: SourceFile, file_dir: str, include_paths: list[str], errors
) -> IncludeRef | None:
    toks = d.tokens
    if len(toks) < 3:
        errors.append(("malformed #include", toks[-1].start))
        d.kind = OTHER
        return None
    first = toks[2]
    if first.kind == lexer.STRING and first.value.startswith('"'):
        path_text = first.value[1:-1] if first.value.endswith('"') else first.value[1:]
        style = QUOTE
    elif first.is_sym("<"):
        closing = None
        for tok in toks[3:]:
            if tok.is_sym(">"):
                closing = tok
                break
        if closing is None:
            errors.append(("malformed #include", first.start))
            d.kind = OTHER
            return None
        path_text = sf.data[first.end_offset : closing.start_offset]
        style = ANGLE
    else:
        errors.append(("malformed #include", first.start))
        d.kind = OTHER
        return None
    if not path_text:
        errors.append(("malformed #include", first.start))
        d.kind = OTHER
        return None
    resolved = None
    candidates: list[str] = []
    if style == QUOTE and file_dir:
        candidates.append(os.path.join(file_dir, path_text))
    for root in include_paths:
        candidates.append(os.path.join(root, path_text))
    for cand in candidates:
        if os.path.isfile(cand):
            resolved = os.path.normpath(cand)
            break
    return IncludeRef(style=style, path_text=path_text, resolved=resolved, directive=d)


class _CondState:
    __slots__ = ("parent_active", "taken", "active", "opener")

    def __init__(self, parent_active: bool, taken: bool, active: bool, opener: Directive):
        self.parent_active = parent_active
        self.taken = taken
        self.active = active
        self.opener = opener


def build_cpp_view(
    sf: SourceFile,
    tokens: list[Token],
    defines: dict[str, str] | None = None,
    include_paths: list[str] | None = None,
) -> CppView:
    view = CppView()
    env: dict[str, str] = dict(defines or {})
    include_paths = list(include_paths or [])
    file_dir = os.path.dirname(sf.path)
    nlines = len(sf.lines)
    active = [True] * (nlines + 2)
    stack: list[_CondState] = []
    ranges = _directive_ranges(tokens)

    def context_active() -> bool:
        return all(s.active for s in stack)

    prev_end_line = 0
    for start, end in ranges:
        d = _parse_one(tokens, start, end, view.errors)
        view.directives.append(d)
        ctx = context_active()
        for ln in range(prev_end_line + 1, d.first_line):
            if ln <= nlines:
                active[ln] = ctx
        d.active = ctx
        for ln in range(d.first_line, d.last_line + 1):
            if ln <= nlines:
                active[ln] = ctx
        kind = d.kind
        if kind in (IF, IFDEF, IFNDEF):
            if kind == IF:
                cond = _eval_condition(d.tokens[2:], env, view.errors, d)
            elif kind == IFDEF:
                cond = _cond_name(d, view.errors) in env
            else:
                cond = _cond_name(d, view.errors) not in env
            branch = ctx and cond
            stack.append(_CondState(ctx, branch, branch, d))
        elif kind == ELIF:
            if not stack:
                view.errors.append(("#elif without #if", d.hash_token.start))
            else:
                st = stack[-1]
                cond = _eval_condition(d.tokens[2:], env, view.errors, d)
                st.active = st.parent_active and not st.taken and cond
                st.taken = st.taken or st.active
        elif kind == ELSE:
            if not stack:
                view.errors.append(("#else without #if", d.hash_token.start))
            else:
                st = stack[-1]
                st.active = st.parent_active and not st.taken
                st.taken = True
        elif kind == ENDIF:
            if not stack:
                view.errors.append(("#endif without #if", d.hash_token.start))
            else:
                stack.pop()
        elif ctx:
            if kind == DEFINE:
                macro = _extract_macro(d, view.errors)
                if macro is not None:
                    view.macros.append(macro)
                    env[macro.name] = _body_text(macro)
            elif kind == UNDEF:
                if len(d.tokens) > 2 and d.tokens[2].kind in (lexer.IDENT, lexer.KEYWORD):
                    env.pop(d.tokens[2].value, None)
            elif kind == INCLUDE:
                inc = _extract_include(d, sf, file_dir, include_paths, view.errors)
                if inc is not None:
                    view.includes.append(inc)
        prev_end_line = d.last_line
    ctx = context_active()
    for ln in range(prev_end_line + 1, nlines + 1):
        active[ln] = ctx
    for st in stack:
        view.errors.append(("unterminated conditional", st.opener.hash_token.start))
    view.active_lines = active
    return view


def _cond_name(d: Directive, errors) -> str:
    if len(d.tokens) > 2 and d.tokens[2].kind in (lexer.IDENT, lexer.KEYWORD):
        return d.tokens[2].value
    errors.append(("missing macro name in conditional", d.tokens[-1].start))
    return ""


def _body_text(macro: MacroDef) -> str:
    return " ".join(t.value for t in macro.body)


def detect_header_guard(view: CppView, tokens: list[Token]) -> HeaderGuard | None:
    """The #ifndef/#define/#endif wrapper, if it encloses the whole file."""
    dirs = view.directives
    if len(dirs) < 3:
        return None
    first, second, last = dirs[0], dirs[1], dirs[-1]
    if first.kind != IFNDEF or second.kind != DEFINE or last.kind != ENDIF:
        return None
    if len(first.tokens) < 3 or len(second.tokens) < 3:
        return None
    guard_name = first.tokens[2].value
    if not guard_name or second.tokens[2].value != guard_name:
        return None
    # guard must wrap all code: no code tokens before #ifndef, between it and
    # the #define, or after #endif; the last #endif must close the #ifndef.
    depth = 0
    closer = None
    for d in dirs[1:]:
        if d.kind in (IF, IFDEF, IFNDEF):
            depth += 1
        elif d.kind == ENDIF:
            if depth == 0:
                closer = d
                break
            depth -= 1
    if closer is not last:
        return None
    for tok in tokens:
        if tok.kind == lexer.EOF:
            continue
        if tok.start.line < first.first_line or tok.start.line > last.last_line:
            return None
        if first.last_line < tok.start.line < second.first_line:
            return None
    endif_line = last.last_line
    endif_end = last.tokens[-1].end_offset
    has_comment = False
    for tok in tokens:
        for tr in tok.leading_trivia:
            if (
                tr.kind in lexer.COMMENT_KINDS
                and tr.start.line == endif_line
                and tr.start_offset >= endif_end
            ):
                has_comment = True
    return HeaderGuard(
        macro_name=guard_name,
        ifndef=first,
        define=second,
        endif=last,
        endif_has_comment=has_comment,
    )


def code_tokens(tokens: list[Token], view: CppView) -> list[Token]:
    """Tokens for structural parsing: active lines, directives excluded."""
    directive_lines: set[int] = set()
    for d in view.directives:
        directive_lines.update(range(d.first_line, d.last_line + 1))
    nlines = len(view.active_lines)
    out = []
    for tok in tokens:
        if tok.kind == lexer.EOF:
            out.append(tok)
            continue
        ln = tok.start.line
        if ln in directive_lines:
            continue
        if ln < nlines and not view.active_lines[ln]:
            continue
        out.append(tok)
    return out


# ---------------------------------------------------------------------------
# #if constant-expression evaluation


class _EvalError(Exception):
    pass


class _CondParser:
    """Minimal C preprocessor constant-expression evaluator."""

    def __init__(self, tokens: list[Token], env: dict[str, str]):
        self.toks = [t for t in tokens if t.kind != lexer.EOF]
        self.i = 0
        self.env = env

    def peek(self) -> Token | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise _EvalError("unexpected end of expression")
        self.i += 1
        return tok

    def accept(self, symbol: str) -> bool:
        tok = self.peek()
        if tok is not None and tok.is_sym(symbol):
            self.i += 1
            return True
        return False

    def parse(self) -> int:
        value = self.ternary()
        if self.peek() is not None:
            raise _EvalError("trailing tokens in expression")
        return value

    def ternary(self) -> int:
        cond = self.logical_or()
        if self.accept("?"):
            then = self.ternary()
            if not self.accept(":"):
                raise _EvalError("missing ':'")
            other = self.ternary()
            return then if cond else other
        return cond

    def logical_or(self) -> int:
        v = self.logical_and()
        while self.accept("||"):
            rhs = self.logical_and()
            v = 1 if (v or rhs) else 0
        return v

    def logical_and(self) -> int:
        v = self.bit_or()
        while self.accept("&&"):
            rhs = self.bit_or()
            v = 1 if (v and rhs) else 0
        return v

    def bit_or(self) -> int:
        v = self.bit_xor()
        while self.accept("|"):
            v |= self.bit_xor()
        return v

    def bit_xor(self) -> int:
        v = self.bit_and()
        while self.accept("^"):
            v ^= self.bit_and()
        return v

    def bit_and(self) -> int:
        v = self.equality()
        while True:
            tok = self.peek()
            if tok is not None and tok.is_sym("&"):
                self.i += 1
                v &= self.equality()
            else:
                return v

    def equality(self) -> int:
        v = self.relational()
        while True:
            if self.accept("=="):
                v = 1 if v == self.relational() else 0
            elif self.accept("!="):
                v = 1 if v != self.relational() else 0
            else:
                return v

    def relational(self) -> int:
        v = self.shift()
        while True:
            if self.accept("<="):
                v = 1 if v <= self.shift() else 0
            elif self.accept(">="):
                v = 1 if v >= self.shift() else 0
            elif self.accept("<"):
                v = 1 if v < self.shift() else 0
            elif self.accept(">"):
                v = 1 if v > self.shift() else 0
            else:
                return v

    def shift(self) -> int:
        v = self.additive()
        while True:
            if self.accept("<<"):
                v <<= self.additive() & 63
            elif self.accept(">>"):
                v >>= self.additive() & 63
            else:
                return v

    def additive(self) -> int:
        v = self.multiplicative()
        while True:
            if self.accept("+"):
                v += self.multiplicative()
            elif self.accept("-"):
                v -= self.multiplicative()
            else:
                return v

    def multiplicative(self) -> int:
        v = self.unary()
        while True:
            if self.accept("*"):
                v *= self.unary()
            elif self.accept("/"):
                rhs = self.unary()
                if rhs == 0:
                    raise _EvalError("division by zero")
                v = int(v / rhs)
            elif self.accept("%"):
                rhs = self.unary()
                if rhs == 0:
                    raise _EvalError("division by zero")
                v = v - int(v / rhs) * rhs
            else:
                return v

    def unary(self) -> int:
        if self.accept("!"):
            return 0 if self.unary() else 1
        if self.accept("~"):
            return ~self.unary()
        if self.accept("-"):
            return -self.unary()
        if self.accept("+"):
            return self.unary()
        return self.primary()

    def primary(self) -> int:
        tok = self.next()
        if tok.is_sym("("):
            v = self.ternary()
            if not self.accept(")"):
                raise _EvalError("missing ')'")
            return v
        if tok.kind == lexer.INT_CONST:
            return _int_value(tok.value)
        if tok.kind == lexer.CHAR_CONST:
            return _char_value(tok.value)
        if tok.kind in (lexer.IDENT, lexer.KEYWORD):
            if tok.value == "defined":
                name = None
                if self.accept("("):
                    inner = self.next()
                    name = inner.value
                    if not self.accept(")"):
                        raise _EvalError("missing ')' after defined")
                else:
                    name = self.next().value
                return 1 if name in self.env else 0
            text = self.env.get(tok.value)
            if text is None:
                return 0
            try:
                return _int_value(text.strip() or "1")
            except _EvalError:
                return 0
        raise _EvalError("unexpected token in expression")


def _int_value(text: str) -> int:
    t = text.strip().lower().rstrip("ul")
    try:
        if t.startswith("0x"):
            return int(t, 16)
        if t.startswith("0") and len(t) > 1 and t.isdigit():
            return int(t, 8)
        return int(t, 10)
    except ValueError as exc:
        raise _EvalError(str(exc)) from exc


_CHAR_ESCAPES = {"n": 10, "t": 9, "r": 13, "0": 0, "\\": 92, "'": 39, '"': 34, "a": 7, "b": 8, "f": 12, "v": 11}


def _char_value(text: str) -> int:
    inner = text[1:-1] if len(text) >= 2 else ""
    if inner.startswith("\\") and len(inner) >= 2:
        return _CHAR_ESCAPES.get(inner[1], ord(inner[1]))
    return ord(inner[0]) if inner else 0


def _eval_condition(tokens: list[Token], env: dict[str, str], errors, d: Directive) -> bool:
    try:
        return _CondParser(tokens, env).parse() != 0
    except _EvalError as exc:
        errors.append((f"cannot evaluate #if expression: {exc}", d.hash_token.start))
        return True
