"""Tolerant structural parser: declarations, statements, expressions.

Best-effort recursive descent over the active-branch token stream.  On
an unparseable region it records a parse error, skips to the next `;`
or balanced `}`, and keeps going; every file yields a tree.  Types are
resolved only from in-file declarations plus the built-in fixed-width
typedef names; anything else is Unknown and checkers stay silent on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import lexer
from .lexer import Token
from .source import SourcePos

# TypeSpec bases
VOID = "void"
CHAR = "char"
INT = "int"
FLOAT = "float"
DOUBLE = "double"
BOOL = "bool"
NAMED = "named"
STRUCT = "struct"
UNION = "union"
ENUM = "enum"
UNKNOWN = "unknown"

# resolved type categories
SIGNED = "signed"
UNSIGNED = "unsigned"
FLOATING = "float"
OTHER = "other"

_SIGNED_NAMES = frozenset(
    "int8_t int16_t int32_t int64_t intmax_t intptr_t ptrdiff_t ssize_t "
    "int_least8_t int_least16_t int_least32_t int_least64_t "
    "int_fast8_t int_fast16_t int_fast32_t int_fast64_t".split()
)
_UNSIGNED_NAMES = frozenset(
    "uint8_t uint16_t uint32_t uint64_t uintmax_t uintptr_t size_t "
    "uint_least8_t uint_least16_t uint_least32_t uint_least64_t "
    "uint_fast8_t uint_fast16_t uint_fast32_t uint_fast64_t".split()
)
_FLOAT_NAMES = frozenset("float32_t float64_t float128_t".split())


@dataclass
class TypeEnv:
    signed_names: frozenset = _SIGNED_NAMES
    unsigned_names: frozenset = _UNSIGNED_NAMES
    float_names: frozenset = _FLOAT_NAMES

    def known(self, name: str) -> bool:
        return (
            name == "bool"
            or name in self.signed_names
            or name in self.unsigned_names
            or name in self.float_names
        )


DEFAULT_TYPE_ENV = TypeEnv()


@dataclass(slots=True)
class TypeSpec:
    base: str = UNKNOWN
    name: str = ""  # typedef name or struct/union/enum tag
    qualifiers: frozenset = frozenset()
    uses_short: bool = False
    long_count: int = 0
    explicit_signed: bool = False
    explicit_unsigned: bool = False
    category: str = UNKNOWN  # signed/unsigned/float/bool/char/void/other/unknown
    tokens: tuple = ()  # specifier tokens as parsed
    struct_info: "StructInfo | None" = None

    @property
    def is_basic_int(self) -> bool:
        """Spelled with basic integer keywords rather than stdint names."""
        return self.base in (CHAR, INT)


UNKNOWN_TYPE = TypeSpec()


@dataclass(slots=True)
class Declarator:
    name: str | None = None
    name_token: Token | None = None
    pointer_depth: int = 0
    is_function: bool = False
    params: list = field(default_factory=list)
    params_void: bool = False
    is_vararg: bool = False
    k_and_r: bool = False
    old_style_empty: bool = False
    is_array: bool = False
    bitfield_width: "Expr | None" = None
    initializer: "Expr | None" = None
    init_eq_token: Token | None = None
    first_token: Token | None = None
    last_token: Token | None = None
    paren_token: Token | None = None  # '(' of the parameter list, if any


@dataclass(slots=True)
class ParamDecl:
    spec: TypeSpec
    declarator: Declarator | None
    name: str | None
    name_token: Token | None


@dataclass(slots=True)
class Decl:
    spec: TypeSpec
    storage: str  # none/static/extern/auto/register/typedef
    declarators: list[Declarator]
    scope: str  # file/block/param/member
    first_token: Token | None
    last_token: Token | None
    inline: bool = False


@dataclass(slots=True)
class StructInfo:
    keyword: str  # struct/union/enum
    tag: str
    keyword_token: Token | None
    members: list[Decl] = field(default_factory=list)
    enumerators: list = field(default_factory=list)  # (name_token, value expr|None)
    has_body: bool = False
    in_typedef: bool = False
    at_file_scope: bool = False
    lbrace: Token | None = None
    rbrace: Token | None = None


@dataclass(slots=True)
class Expr:
    kind: str  # ident/const/string/call/unary/postfix/binary/assign/ternary/
    # cast/paren/index/member/comma/sizeof/init-list/error
    op: str = ""
    children: list = field(default_factory=list)
    token: Token | None = None  # primary token or operator token
    level: int = 0  # C99 precedence level (1 tightest .. 15 comma)
    cast_type: TypeSpec | None = None
    first_token: Token | None = None
    last_token: Token | None = None


# statement kinds
COMPOUND = "compound"
IF = "if"
SWITCH = "switch"
CASE = "case"
DEFAULT = "default"
WHILE = "while"
DO = "do"
FOR = "for"
RETURN = "return"
GOTO = "goto"
LABEL = "label"
BREAK = "break"
CONTINUE = "continue"
EXPR_STMT = "expr"
DECL_STMT = "decl"
EMPTY = "empty"


@dataclass(slots=True)
class Stmt:
    kind: str
    children: list = field(default_factory=list)  # compound children
    cond: Expr | None = None
    init: "Stmt | Expr | None" = None
    step: Expr | None = None
    body: "Stmt | None" = None
    else_body: "Stmt | None" = None
    has_else: bool = False
    else_is_if: bool = False
    expr: Expr | None = None
    decl: Decl | None = None
    label: str = ""
    keyword_token: Token | None = None
    colon_token: Token | None = None
    lbrace: Token | None = None
    rbrace: Token | None = None
    first_token: Token | None = None
    last_token: Token | None = None

    @property
    def body_is_braced(self) -> bool:
        return self.body is not None and self.body.kind == COMPOUND


@dataclass(slots=True)
class FunctionDef:
    name: str
    name_token: Token
    return_type: TypeSpec
    declarator: Declarator
    storage: str
    body: Stmt
    first_token: Token
    last_token: Token
    labels: dict = field(default_factory=dict)  # name -> Token
    gotos: list = field(default_factory=list)  # (name, Token)

    @property
    def is_static(self) -> bool:
        return self.storage == "static"

    @property
    def line_count(self) -> int:
        if self.body.lbrace and self.body.rbrace:
            return self.body.rbrace.start.line - self.body.lbrace.start.line + 1
        return 1

    @property
    def params(self) -> list:
        return self.declarator.params


@dataclass(slots=True)
class Symbol:
    name: str
    kind: str  # object/function/typedef/enum-const/macro
    type: TypeSpec
    linkage: str  # external/internal/none
    storage: str
    pointer_depth: int
    token: Token | None
    is_definition: bool
    scope_depth: int


class SymbolTable:
    def __init__(self):
        self.scopes: list[dict[str, Symbol]] = [{}]

    def push(self):
        self.scopes.append({})

    def pop(self):
        if len(self.scopes) > 1:
            self.scopes.pop()

    def declare(self, sym: Symbol):
        scope = self.scopes[sym.scope_depth if sym.scope_depth < len(self.scopes) else -1]
        existing = scope.get(sym.name)
        if existing is None or (sym.is_definition and not existing.is_definition):
            scope[sym.name] = sym

    def declare_here(self, sym: Symbol):
        sym.scope_depth = len(self.scopes) - 1
        existing = self.scopes[-1].get(sym.name)
        if existing is None or (sym.is_definition and not existing.is_definition):
            self.scopes[-1][sym.name] = sym

    def lookup(self, name: str) -> Symbol | None:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return None

    @property
    def file_scope(self) -> dict[str, Symbol]:
        return self.scopes[0]


@dataclass
class Tree:
    items: list = field(default_factory=list)  # top-level Decl | FunctionDef
    functions: list[FunctionDef] = field(default_factory=list)
    structs: list[StructInfo] = field(default_factory=list)
    symbols: SymbolTable = field(default_factory=SymbolTable)
    errors: list = field(default_factory=list)  # (message, SourcePos)
    star_offsets: set = field(default_factory=set)
    ternary_offsets: set = field(default_factory=set)
    call_paren_offsets: set = field(default_factory=set)
    fndef_paren_offsets: set = field(default_factory=set)
    proto_paren_offsets: set = field(default_factory=set)
    typedef_names: set = field(default_factory=set)


_STORAGE_KEYWORDS = {"typedef", "extern", "static", "auto", "register"}
_QUALIFIERS = {"const", "volatile", "restrict"}
_BASE_KEYWORDS = {"void", "char", "int", "float", "double", "_Bool", "signed", "unsigned", "short", "long"}
_TYPE_START = _STORAGE_KEYWORDS | _QUALIFIERS | _BASE_KEYWORDS | {"struct", "union", "enum", "inline"}

BIN_LEVELS = {
    "*": 3, "/": 3, "%": 3,
    "+": 4, "-": 4,
    "<<": 5, ">>": 5,
    "<": 6, "<=": 6, ">": 6, ">=": 6,
    "==": 7, "!=": 7,
    "&": 8, "^": 9, "|": 10,
    "&&": 11, "||": 12,
}
ASSIGN_OPS = frozenset({"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="})
_UNARY_PREFIX = frozenset({"+", "-", "!", "~", "*", "&", "++", "--"})


class Parser:
    def __init__(self, tokens: list[Token], type_env: TypeEnv | None = None):
        self.toks = tokens
        self.i = 0
        self.env = type_env or DEFAULT_TYPE_ENV
        self.tree = Tree()
        self.typedefs: set[str] = set()
        self.tree.typedef_names = self.typedefs
        self.current_fn: FunctionDef | None = None

    # -- token helpers ------------------------------------------------

    def peek(self, k: int = 0) -> Token:
        idx = self.i + k
        if idx >= len(self.toks):
            return self.toks[-1]
        return self.toks[idx]

    def at_eof(self) -> bool:
        return self.peek().kind == lexer.EOF

    def at(self, symbol: str) -> bool:
        return self.peek().is_sym(symbol)

    def at_kw(self, name: str) -> bool:
        return self.peek().is_kw(name)

    def advance(self) -> Token:
        tok = self.peek()
        if not self.at_eof():
            self.i += 1
        return tok

    def accept(self, symbol: str) -> Token | None:
        if self.at(symbol):
            return self.advance()
        return None

    def expect(self, symbol: str) -> Token | None:
        tok = self.accept(symbol)
        if tok is None:
            self.error(f"expected '{symbol}'", self.peek())
        return tok

    def error(self, message: str, tok: Token):
        self.tree.errors.append((message, tok.start))

    def recover(self, stop_at_rbrace: bool = True):
        """Skip to the next ';' at depth 0 or a closing '}' of this level."""
        depth = 0
        while not self.at_eof():
            tok = self.peek()
            sym = tok.symbol if tok.kind in (lexer.PUNCT, lexer.PP_HASH) else ""
            if sym in ("(", "[", "{"):
                depth += 1
            elif sym == "}":
                if depth == 0:
                    if not stop_at_rbrace:
                        self.advance()
                    return
                depth -= 1
            elif sym in (")", "]"):
                if depth > 0:
                    depth -= 1
            elif sym == ";" and depth == 0:
                self.advance()
                return
            self.advance()

    # -- entry --------------------------------------------------------

    def parse_unit(self) -> Tree:
        while not self.at_eof():
            before = self.i
            self.external_decl()
            if self.i == before:
                self.error("unexpected token", self.peek())
                self.advance()
        return self.tree

    def is_typedef_name(self, tok: Token) -> bool:
        return tok.kind == lexer.IDENT and (tok.value in self.typedefs or self.env.known(tok.value))

    def at_decl_start(self, file_scope: bool) -> bool:
        tok = self.peek()
        if tok.kind == lexer.KEYWORD and tok.value in _TYPE_START:
            return True
        if self.is_typedef_name(tok):
            nxt = self.peek(1)
            if nxt.kind == lexer.IDENT or nxt.is_sym("*") or nxt.is_sym("("):
                return True
            return False
        if file_scope and tok.kind == lexer.IDENT and self.peek(1).kind == lexer.IDENT:
            # unknown typedef followed by a declarator name
            return True
        return False

    def external_decl(self):
        if self.accept(";"):
            return
        if not self.at_decl_start(file_scope=True):
            self.error("unexpected token at file scope", self.peek())
            self.recover(stop_at_rbrace=False)
            return
        item = self.parse_declaration(scope="file")
        if item is not None:
            self.tree.items.append(item)

    # -- declarations -------------------------------------------------

    def parse_specifiers(self, scope: str) -> tuple[TypeSpec, str, bool] | None:
        storage = "none"
        inline = False
        qualifiers: set[str] = set()
        base: str | None = None
        name = ""
        uses_short = False
        long_count = 0
        explicit_signed = False
        explicit_unsigned = False
        struct_info: StructInfo | None = None
        spec_tokens: list[Token] = []
        progressed = True
        while progressed:
            progressed = False
            tok = self.peek()
            if tok.kind == lexer.KEYWORD:
                val = tok.value
                if val in _STORAGE_KEYWORDS:
                    storage = val if storage == "none" else storage
                    spec_tokens.append(self.advance())
                    progressed = True
                elif val in _QUALIFIERS:
                    qualifiers.add(val)
                    spec_tokens.append(self.advance())
                    progressed = True
                elif val == "inline":
                    inline = True
                    spec_tokens.append(self.advance())
                    progressed = True
                elif val == "signed":
                    explicit_signed = True
                    base = base or INT
                    spec_tokens.append(self.advance())
                    progressed = True
                elif val == "unsigned":
                    explicit_unsigned = True
                    base = base or INT
                    spec_tokens.append(self.advance())
                    progressed = True
                elif val == "short":
                    uses_short = True
                    base = base or INT
                    spec_tokens.append(self.advance())
                    progressed = True
                elif val == "long":
                    long_count += 1
                    if base not in (DOUBLE,):
                        base = base or INT
                    spec_tokens.append(self.advance())
                    progressed = True
                elif val in ("void", "char", "int", "float", "double", "_Bool"):
                    mapped = {"void": VOID, "char": CHAR, "int": INT, "float": FLOAT,
                              "double": DOUBLE, "_Bool": BOOL}[val]
                    if base in (None, INT) or mapped != INT:
                        base = mapped if base in (None, INT) else base
                    spec_tokens.append(self.advance())
                    progressed = True
                elif val in ("struct", "union", "enum"):
                    struct_info = self.parse_struct_or_enum(val, scope)
                    base = {"struct": STRUCT, "union": UNION, "enum": ENUM}[val]
                    name = struct_info.tag
                    progressed = True
            elif tok.kind == lexer.IDENT and base is None and struct_info is None:
                if self.is_typedef_name(tok):
                    base = NAMED
                    name = tok.value
                    spec_tokens.append(self.advance())
                    progressed = True
                elif self.peek(1).kind == lexer.IDENT and (
                    scope in ("file", "member", "param") or storage != "none" or qualifiers
                ):
                    # unknown typedef name: tolerate and mark Unknown signedness
                    base = NAMED
                    name = tok.value
                    spec_tokens.append(self.advance())
                    progressed = True
        if not spec_tokens and struct_info is None:
            return None
        spec = self.build_typespec(
            base, name, qualifiers, uses_short, long_count,
            explicit_signed, explicit_unsigned, struct_info, spec_tokens,
        )
        return spec, storage, inline

    def build_typespec(self, base, name, qualifiers, uses_short, long_count,
                       explicit_signed, explicit_unsigned, struct_info, spec_tokens) -> TypeSpec:
        if base is None:
            base = UNKNOWN
        category = UNKNOWN
        if base == VOID:
            category = "void"
        elif base == BOOL:
            category = BOOL
        elif base in (FLOAT, DOUBLE):
            category = FLOATING
        elif base == CHAR:
            if explicit_unsigned:
                category = UNSIGNED
            elif explicit_signed:
                category = SIGNED
            else:
                category = "char"
        elif base == INT:
            category = UNSIGNED if explicit_unsigned else SIGNED
        elif base == NAMED:
            if name == "bool":
                base = BOOL
                category = BOOL
            elif name in self.env.unsigned_names:
                category = UNSIGNED
            elif name in self.env.signed_names:
                category = SIGNED
            elif name in self.env.float_names:
                category = FLOATING
            else:
                category = UNKNOWN
        elif base in (STRUCT, UNION, ENUM):
            category = OTHER
        return TypeSpec(
            base=base,
            name=name,
            qualifiers=frozenset(qualifiers),
            uses_short=uses_short,
            long_count=long_count,
            explicit_signed=explicit_signed,
            explicit_unsigned=explicit_unsigned,
            category=category,
            tokens=tuple(spec_tokens),
            struct_info=struct_info,
        )

    def parse_struct_or_enum(self, keyword: str, scope: str) -> StructInfo:
        kw_tok = self.advance()
        info = StructInfo(keyword=keyword, tag="", keyword_token=kw_tok,
                          at_file_scope=(scope == "file"))
        tok = self.peek()
        if tok.kind in (lexer.IDENT,):
            info.tag = tok.value
            self.advance()
        if self.at("{"):
            info.has_body = True
            info.lbrace = self.advance()
            if keyword == "enum":
                self.parse_enumerators(info)
            else:
                self.parse_members(info)
            info.rbrace = self.expect("}")
            self.tree.structs.append(info)
        return info

    def parse_enumerators(self, info: StructInfo):
        while not self.at_eof() and not self.at("}"):
            tok = self.peek()
            if tok.kind == lexer.IDENT:
                name_tok = self.advance()
                value = None
                if self.accept("="):
                    value = self.parse_assign_expr()
                info.enumerators.append((name_tok, value))
                self.tree.symbols.declare_here(Symbol(
                    name=name_tok.value, kind="enum-const", type=TypeSpec(base=ENUM, category=OTHER),
                    linkage="none", storage="none", pointer_depth=0,
                    token=name_tok, is_definition=True, scope_depth=0,
                ))
                if not self.accept(","):
                    break
            else:
                self.error("expected enumerator name", tok)
                self.recover()
                break

    def parse_members(self, info: StructInfo):
        while not self.at_eof() and not self.at("}"):
            before = self.i
            decl = self.parse_declaration(scope="member")
            if decl is not None and isinstance(decl, Decl):
                info.members.append(decl)
            if self.i == before:
                self.error("unexpected token in struct body", self.peek())
                self.advance()

    def parse_declaration(self, scope: str):
        """A declaration or function definition; returns Decl or FunctionDef."""
        first_tok = self.peek()
        parsed = self.parse_specifiers(scope)
        if parsed is None:
            self.error("expected declaration specifiers", self.peek())
            self.recover()
            return None
        spec, storage, inline = parsed
        if self.at(";"):
            last = self.advance()
            if spec.struct_info is not None and storage == "typedef":
                spec.struct_info.in_typedef = True
            return Decl(spec=spec, storage=storage, declarators=[], scope=scope,
                        first_token=first_tok, last_token=last, inline=inline)
        declarators: list[Declarator] = []
        while True:
            decl_obj = self.parse_declarator(scope)
            if decl_obj is None:
                self.recover()
                break
            # function definition?
            if (
                scope == "file"
                and decl_obj.is_function
                and not declarators
                and (self.at("{") or (not self.at(",") and not self.at(";") and not self.at("=")
                                      and self.at_decl_start(file_scope=False)))
            ):
                return self.parse_function_def(spec, storage, decl_obj, first_tok, inline)
            if scope == "member" and self.accept(":"):
                decl_obj.bitfield_width = self.parse_cond_expr()
            if self.at("="):
                decl_obj.init_eq_token = self.advance()
                decl_obj.initializer = self.parse_initializer()
            declarators.append(decl_obj)
            self.register_declarator(spec, storage, decl_obj, scope)
            if not self.accept(","):
                break
        last = self.expect(";")
        if spec.struct_info is not None and storage == "typedef":
            spec.struct_info.in_typedef = True
        if decl_obj := None:
            pass
        return Decl(spec=spec, storage=storage, declarators=declarators, scope=scope,
                    first_token=first_tok,
                    last_token=last or (declarators[-1].last_token if declarators else first_tok),
                    inline=inline)

    def parse_declarator(self, scope: str) -> Declarator | None:
        d = Declarator(first_token=self.peek())
        while self.at("*") or (self.peek().kind == lexer.KEYWORD and self.peek().value in _QUALIFIERS):
            tok = self.advance()
            if tok.symbol == "*":
                d.pointer_depth += 1
                self.tree.star_offsets.add(tok.start_offset)
        tok = self.peek()
        inner: Declarator | None = None
        if tok.is_sym("("):
            # grouped declarator (function pointers): '(' not starting a
            # parameter list because no name has been seen yet
            self.advance()
            inner = self.parse_declarator(scope)
            self.expect(")")
            if inner is not None:
                d.name = inner.name
                d.name_token = inner.name_token
                d.pointer_depth += inner.pointer_depth
        elif tok.kind == lexer.IDENT or tok.kind == lexer.KEYWORD:
            if tok.kind == lexer.KEYWORD:
                # keyword used as a name: lexical misuse, let it through for
                # the naming checks but record a parse error
                self.error("keyword used as identifier", tok)
            d.name = tok.value
            d.name_token = tok
            self.advance()
        # abstract declarator otherwise
        while True:
            if self.at("("):
                paren = self.advance()
                d.paren_token = paren
                self.parse_param_list(d)
                d.is_function = True
            elif self.at("["):
                self.advance()
                d.is_array = True
                depth = 1
                while not self.at_eof() and depth > 0:
                    if self.at("["):
                        depth += 1
                    elif self.at("]"):
                        depth -= 1
                        if depth == 0:
                            break
                    self.advance()
                self.expect("]")
            else:
                break
        d.last_token = self.toks[self.i - 1] if self.i > 0 else d.first_token
        return d

    def parse_param_list(self, d: Declarator):
        if self.at(")"):
            self.advance()
            d.old_style_empty = True
            return
        if self.at_kw("void") and self.peek(1).is_sym(")"):
            self.advance()
            self.advance()
            d.params_void = True
            return
        # K&R identifier list: plain identifiers separated by commas
        if (
            self.peek().kind == lexer.IDENT
            and not self.is_typedef_name(self.peek())
            and (self.peek(1).is_sym(",") or self.peek(1).is_sym(")"))
        ):
            d.k_and_r = True
            while not self.at_eof() and not self.at(")"):
                tok = self.advance()
                if tok.kind == lexer.IDENT:
                    d.params.append(ParamDecl(spec=UNKNOWN_TYPE, declarator=None,
                                              name=tok.value, name_token=tok))
            self.expect(")")
            return
        while not self.at_eof():
            if self.at("..."):
                self.advance()
                d.is_vararg = True
                break
            parsed = self.parse_specifiers(scope="param")
            if parsed is None:
                self.error("expected parameter declaration", self.peek())
                break
            spec, _storage, _inline = parsed
            pd = self.parse_declarator(scope="param")
            name = pd.name if pd else None
            d.params.append(ParamDecl(spec=spec, declarator=pd, name=name,
                                      name_token=pd.name_token if pd else None))
            if not self.accept(","):
                break
        self.expect(")")

    def parse_initializer(self) -> Expr:
        if self.at("{"):
            first = self.advance()
            items: list[Expr] = []
            while not self.at_eof() and not self.at("}"):
                if self.at("{"):
                    items.append(self.parse_initializer())
                elif self.at(".") or self.at("["):
                    # designators: skip to '=' then parse the value
                    while not self.at_eof() and not self.at("=") and not self.at(",") and not self.at("}"):
                        self.advance()
                    if self.accept("="):
                        items.append(self.parse_assign_expr())
                else:
                    items.append(self.parse_assign_expr())
                if not self.accept(","):
                    break
            last = self.expect("}")
            node = Expr(kind="init-list", children=items, first_token=first,
                        last_token=last or first)
            return node
        return self.parse_assign_expr()

    def register_declarator(self, spec: TypeSpec, storage: str, d: Declarator, scope: str):
        if d.name is None:
            return
        if storage == "typedef":
            self.typedefs.add(d.name)
            kind = "typedef"
            linkage = "none"
        elif d.is_function:
            kind = "function"
            linkage = "internal" if storage == "static" else "external"
        else:
            kind = "object"
            if scope == "file":
                linkage = "internal" if storage == "static" else "external"
            else:
                linkage = "none"
        is_def = scope in ("file", "block") and storage != "extern" and not d.is_function
        sym = Symbol(
            name=d.name, kind=kind, type=spec, linkage=linkage, storage=storage,
            pointer_depth=d.pointer_depth, token=d.name_token,
            is_definition=is_def, scope_depth=0,
        )
        if scope == "file":
            sym.scope_depth = 0
            self.tree.symbols.declare(sym)
        elif scope in ("block", "param"):
            self.tree.symbols.declare_here(sym)
        if d.is_function and d.paren_token is not None:
            self.tree.proto_paren_offsets.add(d.paren_token.start_offset)

    def parse_function_def(self, spec: TypeSpec, storage: str, d: Declarator,
                           first_tok: Token, inline: bool) -> FunctionDef | None:
        if d.paren_token is not None:
            self.tree.fndef_paren_offsets.add(d.paren_token.start_offset)
            self.tree.proto_paren_offsets.discard(d.paren_token.start_offset)
        # K&R parameter declarations between ')' and '{'
        while not self.at("{") and not self.at_eof() and self.at_decl_start(file_scope=False):
            d.k_and_r = True
            self.parse_declaration(scope="param")
        name_tok = d.name_token or first_tok
        sym = Symbol(
            name=d.name or "", kind="function", type=spec,
            linkage="internal" if storage == "static" else "external",
            storage=storage, pointer_depth=d.pointer_depth, token=name_tok,
            is_definition=True, scope_depth=0,
        )
        self.tree.symbols.declare(sym)
        fn = FunctionDef(
            name=d.name or "", name_token=name_tok, return_type=spec, declarator=d,
            storage=storage, body=Stmt(kind=COMPOUND), first_token=first_tok,
            last_token=name_tok,
        )
        prev_fn = self.current_fn
        self.current_fn = fn
        self.tree.symbols.push()
        for p in d.params:
            if p.name:
                self.tree.symbols.declare_here(Symbol(
                    name=p.name, kind="object", type=p.spec, linkage="none",
                    storage="none",
                    pointer_depth=p.declarator.pointer_depth if p.declarator else 0,
                    token=p.name_token, is_definition=True, scope_depth=0,
                ))
        if self.at("{"):
            fn.body = self.parse_compound()
        else:
            self.error("expected function body", self.peek())
            self.recover()
        self.tree.symbols.pop()
        self.current_fn = prev_fn
        fn.last_token = fn.body.rbrace or fn.body.last_token or name_tok
        for label_name, tok in fn.gotos:
            if label_name not in fn.labels:
                self.error(f"goto to undefined label '{label_name}'", tok.start and tok)
        self.tree.functions.append(fn)
        self.tree.items.append(fn)
        return None if fn in self.tree.items else fn

    # -- statements ---------------------------------------------------

    def parse_compound(self) -> Stmt:
        lbrace = self.expect("{")
        node = Stmt(kind=COMPOUND, lbrace=lbrace, first_token=lbrace)
        self.tree.symbols.push()
        while not self.at_eof() and not self.at("}"):
            before = self.i
            child = self.parse_block_item()
            if child is not None:
                node.children.append(child)
            if self.i == before:
                self.error("unexpected token in block", self.peek())
                self.advance()
        node.rbrace = self.expect("}")
        node.last_token = node.rbrace or self.peek()
        self.tree.symbols.pop()
        return node

    def parse_block_item(self) -> Stmt | None:
        if self.at_decl_start(file_scope=False):
            first = self.peek()
            decl = self.parse_declaration(scope="block")
            if isinstance(decl, Decl):
                return Stmt(kind=DECL_STMT, decl=decl, first_token=first,
                            last_token=decl.last_token)
            return None
        return self.parse_statement()

    def parse_statement(self) -> Stmt | None:
        tok = self.peek()
        if tok.is_sym("{"):
            return self.parse_compound()
        if tok.is_sym(";"):
            self.advance()
            return Stmt(kind=EMPTY, first_token=tok, last_token=tok)
        if tok.kind == lexer.KEYWORD:
            name = tok.value
            if name == "if":
                return self.parse_if()
            if name == "switch":
                return self.parse_switch()
            if name == "while":
                return self.parse_while()
            if name == "do":
                return self.parse_do()
            if name == "for":
                return self.parse_for()
            if name == "return":
                self.advance()
                expr = None
                if not self.at(";"):
                    expr = self.parse_expr()
                last = self.expect(";") or tok
                return Stmt(kind=RETURN, expr=expr, keyword_token=tok,
                            first_token=tok, last_token=last)
            if name == "goto":
                self.advance()
                target = ""
                if self.peek().kind == lexer.IDENT:
                    target = self.peek().value
                    if self.current_fn is not None:
                        self.current_fn.gotos.append((target, self.peek()))
                    self.advance()
                else:
                    self.error("expected label after goto", self.peek())
                last = self.expect(";") or tok
                return Stmt(kind=GOTO, label=target, keyword_token=tok,
                            first_token=tok, last_token=last)
            if name == "break":
                self.advance()
                last = self.expect(";") or tok
                return Stmt(kind=BREAK, keyword_token=tok, first_token=tok, last_token=last)
            if name == "continue":
                self.advance()
                last = self.expect(";") or tok
                return Stmt(kind=CONTINUE, keyword_token=tok, first_token=tok, last_token=last)
            if name == "case":
                self.advance()
                expr = self.parse_cond_expr()
                colon = self.expect(":")
                return Stmt(kind=CASE, expr=expr, keyword_token=tok, colon_token=colon,
                            first_token=tok, last_token=colon or tok)
            if name == "default":
                self.advance()
                colon = self.expect(":")
                return Stmt(kind=DEFAULT, keyword_token=tok, colon_token=colon,
                            first_token=tok, last_token=colon or tok)
        if tok.kind == lexer.IDENT and self.peek(1).is_sym(":"):
            self.advance()
            colon = self.advance()
            if self.current_fn is not None:
                self.current_fn.labels.setdefault(tok.value, tok)
            return Stmt(kind=LABEL, label=tok.value, keyword_token=tok,
                        colon_token=colon, first_token=tok, last_token=colon)
        expr = self.parse_expr()
        if expr is None or expr.kind == "error":
            self.recover()
            return Stmt(kind=EXPR_STMT, expr=expr, first_token=tok, last_token=tok)
        last = self.expect(";") or expr.last_token or tok
        if last is not expr.last_token and last is not tok:
            pass
        else:
            self.recover_if_stuck()
        return Stmt(kind=EXPR_STMT, expr=expr, first_token=tok, last_token=last)

    def recover_if_stuck(self):
        """After a failed ';' the stream may sit on junk; skip the statement."""
        self.recover()

    def parse_paren_cond(self) -> Expr | None:
        self.expect("(")
        expr = self.parse_expr()
        self.expect(")")
        return expr

    def parse_if(self) -> Stmt:
        kw = self.advance()
        cond = self.parse_paren_cond()
        body = self.parse_statement()
        node = Stmt(kind=IF, cond=cond, body=body, keyword_token=kw,
                    first_token=kw, last_token=body.last_token if body else kw)
        if self.at_kw("else"):
            self.advance()
            node.has_else = True
            if self.at_kw("if"):
                node.else_is_if = True
                node.else_body = self.parse_if()
            else:
                node.else_body = self.parse_statement()
            if node.else_body is not None:
                node.last_token = node.else_body.last_token
        return node

    def parse_switch(self) -> Stmt:
        kw = self.advance()
        cond = self.parse_paren_cond()
        body = self.parse_statement()
        return Stmt(kind=SWITCH, cond=cond, body=body, keyword_token=kw,
                    first_token=kw, last_token=body.last_token if body else kw)

    def parse_while(self) -> Stmt:
        kw = self.advance()
        cond = self.parse_paren_cond()
        body = self.parse_statement()
        return Stmt(kind=WHILE, cond=cond, body=body, keyword_token=kw,
                    first_token=kw, last_token=body.last_token if body else kw)

    def parse_do(self) -> Stmt:
        kw = self.advance()
        body = self.parse_statement()
        node = Stmt(kind=DO, body=body, keyword_token=kw, first_token=kw, last_token=kw)
        if self.at_kw("while"):
            self.advance()
            node.cond = self.parse_paren_cond()
            node.last_token = self.expect(";") or kw
        else:
            self.error("expected 'while' after do body", self.peek())
        return node

    def parse_for(self) -> Stmt:
        kw = self.advance()
        self.expect("(")
        init: Stmt | Expr | None = None
        if self.at(";"):
            self.advance()
        elif self.at_decl_start(file_scope=False):
            decl = self.parse_declaration(scope="block")
            if isinstance(decl, Decl):
                init = decl  # parse_declaration consumed the ';'
        else:
            init = self.parse_expr()
            self.expect(";")
        cond = None
        if not self.at(";"):
            cond = self.parse_expr()
        self.expect(";")
        step = None
        if not self.at(")"):
            step = self.parse_expr()
        self.expect(")")
        body = self.parse_statement()
        return Stmt(kind=FOR, init=init, cond=cond, step=step, body=body,
                    keyword_token=kw, first_token=kw,
                    last_token=body.last_token if body else kw)

    # -- expressions --------------------------------------------------

    def parse_expr(self) -> Expr | None:
        e = self.parse_assign_expr()
        while e is not None and self.at(","):
            op_tok = self.advance()
            rhs = self.parse_assign_expr()
            e = Expr(kind="comma", op=",", children=[e, rhs], token=op_tok, level=15,
                     first_token=e.first_token,
                     last_token=rhs.last_token if rhs else op_tok)
        return e

    def parse_assign_expr(self) -> Expr | None:
        lhs = self.parse_ternary()
        if lhs is None:
            return None
        tok = self.peek()
        if tok.kind == lexer.PUNCT and tok.symbol in ASSIGN_OPS:
            op_tok = self.advance()
            rhs = self.parse_assign_expr()
            return Expr(kind="assign", op=op_tok.symbol, children=[lhs, rhs] if rhs else [lhs],
                        token=op_tok, level=14, first_token=lhs.first_token,
                        last_token=(rhs.last_token if rhs else op_tok))
        return lhs

    def parse_cond_expr(self) -> Expr | None:
        return self.parse_ternary()

    def parse_ternary(self) -> Expr | None:
        cond = self.parse_binary(12)
        if cond is None:
            return None
        if self.at("?"):
            q = self.advance()
            self.tree.ternary_offsets.add(q.start_offset)
            then = self.parse_expr()
            colon = self.expect(":")
            if colon is not None:
                self.tree.ternary_offsets.add(colon.start_offset)
            other = self.parse_ternary()
            return Expr(kind="ternary", op="?:", children=[c for c in (cond, then, other) if c],
                        token=q, level=13, first_token=cond.first_token,
                        last_token=other.last_token if other else (colon or q))
        return cond

    def parse_binary(self, max_level: int) -> Expr | None:
        lhs = self.parse_unary()
        if lhs is None:
            return None
        while True:
            tok = self.peek()
            if tok.kind != lexer.PUNCT:
                return lhs
            level = BIN_LEVELS.get(tok.symbol)
            if level is None or level > max_level:
                return lhs
            op_tok = self.advance()
            rhs = self.parse_binary(level - 1)
            lhs = Expr(kind="binary", op=op_tok.symbol, children=[lhs, rhs] if rhs else [lhs],
                       token=op_tok, level=level, first_token=lhs.first_token,
                       last_token=rhs.last_token if rhs else op_tok)

    def looks_like_type(self, start: int, end: int) -> bool:
        """Do tokens in (start, end) form a type name? (cast heuristic)"""
        saw_type = False
        for idx in range(start, end):
            tok = self.toks[idx]
            if tok.kind == lexer.KEYWORD:
                if tok.value in _BASE_KEYWORDS or tok.value in _QUALIFIERS or tok.value in (
                    "struct", "union", "enum",
                ):
                    saw_type = True
                    continue
                return False
            if tok.kind == lexer.IDENT:
                if self.is_typedef_name(tok):
                    saw_type = True
                    continue
                if self.toks[idx - 1].kind == lexer.KEYWORD and self.toks[idx - 1].value in (
                    "struct", "union", "enum",
                ):
                    continue
                return False
            if tok.kind == lexer.PUNCT and tok.symbol in ("*", "[", "]"):
                continue
            if tok.kind == lexer.INT_CONST:
                continue
            return False
        return saw_type

    def find_matching_paren(self, start: int) -> int:
        depth = 0
        idx = start
        while idx < len(self.toks):
            tok = self.toks[idx]
            if tok.is_sym("("):
                depth += 1
            elif tok.is_sym(")"):
                depth -= 1
                if depth == 0:
                    return idx
            elif tok.kind == lexer.EOF:
                break
            idx += 1
        return -1

    def parse_unary(self) -> Expr | None:
        tok = self.peek()
        if tok.kind == lexer.PUNCT and tok.symbol in _UNARY_PREFIX:
            op_tok = self.advance()
            operand = self.parse_unary()
            return Expr(kind="unary", op=op_tok.symbol, children=[operand] if operand else [],
                        token=op_tok, level=2, first_token=op_tok,
                        last_token=operand.last_token if operand else op_tok)
        if tok.is_kw("sizeof"):
            kw = self.advance()
            if self.at("("):
                close = self.find_matching_paren(self.i)
                if close > 0 and self.looks_like_type(self.i + 1, close):
                    last = self.toks[close]
                    self.i = close + 1
                    return Expr(kind="sizeof", op="sizeof", token=kw,
                                first_token=kw, last_token=last, level=2)
            operand = self.parse_unary()
            return Expr(kind="sizeof", op="sizeof", children=[operand] if operand else [],
                        token=kw, first_token=kw,
                        last_token=operand.last_token if operand else kw, level=2)
        if tok.is_sym("("):
            close = self.find_matching_paren(self.i)
            if close > 0 and close > self.i + 1 and self.looks_like_type(self.i + 1, close):
                lparen = self.advance()
                saved = self.i
                parsed = self.parse_specifiers(scope="param")
                target: TypeSpec | None = None
                depth = 0
                if parsed is not None:
                    target = parsed[0]
                    while self.at("*"):
                        self.advance()
                        depth += 1
                self.i = close
                self.advance()  # ')'
                if self.at("{"):
                    lit = self.parse_initializer()
                    return Expr(kind="const", op="compound-literal", token=lparen,
                                first_token=lparen,
                                last_token=lit.last_token if lit else self.toks[close],
                                level=1)
                operand = self.parse_unary()
                node = Expr(kind="cast", op="cast", children=[operand] if operand else [],
                            token=lparen, cast_type=target, level=2, first_token=lparen,
                            last_token=operand.last_token if operand else self.toks[close])
                if target is not None and depth:
                    node.cast_type = TypeSpec(base=target.base, name=target.name,
                                              category=UNKNOWN)
                return node
        return self.parse_postfix()

    def parse_postfix(self) -> Expr | None:
        e = self.parse_primary()
        if e is None:
            return None
        while True:
            tok = self.peek()
            if tok.is_sym("("):
                lparen = self.advance()
                self.tree.call_paren_offsets.add(lparen.start_offset)
                args: list[Expr] = []
                while not self.at_eof() and not self.at(")"):
                    arg = self.parse_assign_expr()
                    if arg is None:
                        break
                    args.append(arg)
                    if not self.accept(","):
                        break
                last = self.expect(")")
                e = Expr(kind="call", op="()", children=[e] + args, token=lparen, level=1,
                         first_token=e.first_token, last_token=last or lparen)
            elif tok.is_sym("["):
                self.advance()
                idx = self.parse_expr()
                last = self.expect("]")
                e = Expr(kind="index", op="[]", children=[e, idx] if idx else [e],
                         token=tok, level=1, first_token=e.first_token,
                         last_token=last or tok)
            elif tok.is_sym(".") or tok.is_sym("->"):
                op_tok = self.advance()
                member_tok = self.peek()
                if member_tok.kind == lexer.IDENT:
                    self.advance()
                else:
                    self.error("expected member name", member_tok)
                    member_tok = op_tok
                e = Expr(kind="member", op=op_tok.symbol, children=[e], token=op_tok,
                         level=1, first_token=e.first_token, last_token=member_tok)
            elif tok.is_sym("++") or tok.is_sym("--"):
                op_tok = self.advance()
                e = Expr(kind="postfix", op=op_tok.symbol, children=[e], token=op_tok,
                         level=1, first_token=e.first_token, last_token=op_tok)
            else:
                return e

    def parse_primary(self) -> Expr | None:
        tok = self.peek()
        if tok.kind == lexer.IDENT:
            self.advance()
            return Expr(kind="ident", token=tok, level=1, first_token=tok, last_token=tok)
        if tok.kind in (lexer.INT_CONST, lexer.FLOAT_CONST, lexer.CHAR_CONST):
            self.advance()
            return Expr(kind="const", token=tok, level=1, first_token=tok, last_token=tok)
        if tok.kind == lexer.STRING:
            self.advance()
            last = tok
            while self.peek().kind == lexer.STRING:  # adjacent literal concatenation
                last = self.advance()
            return Expr(kind="string", token=tok, level=1, first_token=tok, last_token=last)
        if tok.is_sym("("):
            lparen = self.advance()
            inner = self.parse_expr()
            last = self.expect(")")
            return Expr(kind="paren", children=[inner] if inner else [], token=lparen,
                        level=1, first_token=lparen, last_token=last or lparen)
        self.error("expected expression", tok)
        return None


def parse_translation_unit(tokens: list[Token], type_env: TypeEnv | None = None) -> Tree:
    parser = Parser(tokens, type_env)
    return parser.parse_unit()


# ---------------------------------------------------------------------------
# type resolution


def resolve_local_type(expr: Expr | None, symbols: SymbolTable,
                       type_env: TypeEnv | None = None) -> TypeSpec:
    """Best-effort type of an expression; Unknown whenever unsure."""
    if expr is None:
        return UNKNOWN_TYPE
    kind = expr.kind
    if kind == "ident":
        sym = symbols.lookup(expr.token.value) if expr.token else None
        if sym is None or sym.kind not in ("object", "function"):
            return UNKNOWN_TYPE
        if sym.pointer_depth > 0:
            return UNKNOWN_TYPE
        return sym.type
    if kind == "const":
        tok = expr.token
        if tok is None:
            return UNKNOWN_TYPE
        if tok.kind == lexer.INT_CONST:
            if "u" in tok.suffix:
                return TypeSpec(base=INT, explicit_unsigned=True, category=UNSIGNED)
            return TypeSpec(base=INT, category=SIGNED)
        if tok.kind == lexer.FLOAT_CONST:
            return TypeSpec(base=DOUBLE, category=FLOATING)
        return UNKNOWN_TYPE
    if kind == "paren":
        return resolve_local_type(expr.children[0] if expr.children else None, symbols, type_env)
    if kind == "unary":
        if expr.op in ("-", "+", "~"):
            return resolve_local_type(expr.children[0] if expr.children else None, symbols, type_env)
        if expr.op == "!":
            return TypeSpec(base=INT, category=SIGNED)
        return UNKNOWN_TYPE
    if kind == "postfix":
        return resolve_local_type(expr.children[0] if expr.children else None, symbols, type_env)
    if kind == "cast":
        return expr.cast_type or UNKNOWN_TYPE
    if kind == "assign":
        return resolve_local_type(expr.children[0] if expr.children else None, symbols, type_env)
    if kind == "comma":
        return resolve_local_type(expr.children[-1] if expr.children else None, symbols, type_env)
    if kind == "call":
        callee = expr.children[0] if expr.children else None
        if callee is not None and callee.kind == "ident" and callee.token is not None:
            sym = symbols.lookup(callee.token.value)
            if sym is not None and sym.kind == "function" and sym.pointer_depth == 0:
                return sym.type
        return UNKNOWN_TYPE
    if kind == "binary":
        if expr.op in BIN_LEVELS and BIN_LEVELS[expr.op] <= 10 and len(expr.children) == 2:
            left = resolve_local_type(expr.children[0], symbols, type_env)
            right = resolve_local_type(expr.children[1], symbols, type_env)
            if left.category == UNKNOWN or right.category == UNKNOWN:
                return UNKNOWN_TYPE
            if BIN_LEVELS[expr.op] in (6, 7):
                return TypeSpec(base=INT, category=SIGNED)
            if FLOATING in (left.category, right.category):
                return TypeSpec(base=DOUBLE, category=FLOATING)
            if UNSIGNED in (left.category, right.category):
                return TypeSpec(base=INT, explicit_unsigned=True, category=UNSIGNED)
            return TypeSpec(base=INT, category=SIGNED)
        return UNKNOWN_TYPE
    return UNKNOWN_TYPE


def walk_stmts(root: Stmt | None):
    """Yield every statement under root, including root."""
    if root is None:
        return
    stack = [root]
    while stack:
        node = stack.pop()
        yield node
        for child in reversed(node.children):
            stack.append(child)
        for sub in (node.body, node.else_body):
            if sub is not None:
                stack.append(sub)
        if isinstance(node.init, Stmt):
            stack.append(node.init)


def walk_exprs(root: Expr | None):
    if root is None:
        return
    stack = [root]
    while stack:
        node = stack.pop()
        if node is None:
            continue
        yield node
        for child in node.children:
            if isinstance(child, Expr):
                stack.append(child)


def stmt_exprs(stmt: Stmt):
    """Top-level expressions attached to one statement (not recursive)."""
    for e in (stmt.cond, stmt.step, stmt.expr):
        if e is not None:
            yield e
    if isinstance(stmt.init, Expr):
        yield stmt.init
    if isinstance(stmt.init, Decl):
        for d in stmt.init.declarators:
            if d.initializer is not None:
                yield d.initializer
    if stmt.decl is not None:
        for d in stmt.decl.declarators:
            if d.initializer is not None:
                yield d.initializer
            if d.bitfield_width is not None:
                yield d.bitfield_width
