"""Чтение исходного текста: токенизация, разбор по таблице операторов, классификация директив."""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional

from .exceptions import PrologSyntaxError
from .terms import NIL, Atom, Compound, Int, Var, make_list

logger = logging.getLogger(__name__)

SYMBOL_CHARS = frozenset("+-*/\\^<>=~:.?@#&$")
SOLO_CHARS = frozenset("!;")
PUNCT_CHARS = frozenset("()[],|")
ESCAPES = {"n": "\n", "t": "\t", "\\": "\\", "'": "'"}
OPERATOR_TYPES = ("xfx", "xfy", "yfx", "fy", "fx", "xf", "yf")


class Location(NamedTuple):
    file: str
    line: int
    column: int

    def __str__(self):
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Token:
    kind: str  # atom, var, int, punct, end
    value: object
    line: int
    column: int
    layout_before: bool = False
    quoted: bool = False


@dataclass(frozen=True)
class SourceItem:
    kind: str  # clause | directive
    term: object
    location: Location


@dataclass(frozen=True)
class OpDef:
    priority: int
    type: str
    name: str

    @property
    def operand_class(self):
        if self.type in ("fy", "fx"):
            return "prefix"
        if self.type in ("xf", "yf"):
            return "postfix"
        return "infix"


class OperatorTable:
    """Фиксированная таблица операторов; op/3 не поддерживается."""

    DEFAULT_ENTRIES = (
        (1200, "xfx", ":-"),
        (1200, "fx", ":-"),
        (1200, "fx", "?-"),
        (1150, "fx", "dynamic"),
        (1100, "xfy", ";"),
        (1050, "xfy", "->"),
        (1000, "xfy", ","),
        (900, "fy", "\\+"),
        (700, "xfx", "="),
        (700, "xfx", "\\="),
        (700, "xfx", "=="),
        (700, "xfx", "\\=="),
        (700, "xfx", "=.."),
        (700, "xfx", "is"),
        (700, "xfx", "<"),
        (700, "xfx", ">"),
        (700, "xfx", "=<"),
        (700, "xfx", ">="),
        (500, "yfx", "+"),
        (500, "yfx", "-"),
        (400, "yfx", "*"),
        (400, "yfx", "/"),
        (400, "yfx", "//"),
        (400, "yfx", "mod"),
        (200, "xfy", "^"),
        (200, "fy", "-"),
        (200, "fy", "+"),
        # `::` has no published priority; it mirrors `:`.
        (200, "xfy", ":"),
        (200, "xfy", "::"),
    )

    def __init__(self, entries):
        self.entries = []
        self._by_class = {"prefix": {}, "infix": {}, "postfix": {}}
        for priority, op_type, name in entries:
            if not 1 <= priority <= 1200:
                raise ValueError(f"Operator priority out of range: {priority} {name}")
            if op_type not in OPERATOR_TYPES:
                raise ValueError(f"Unknown operator type: {op_type} {name}")
            op = OpDef(priority, op_type, name)
            table = self._by_class[op.operand_class]
            if name in table:
                raise ValueError(f"Ambiguous operator definition for '{name}' ({op.operand_class})")
            table[name] = op
            self.entries.append(op)

    @classmethod
    def default(cls):
        return cls(cls.DEFAULT_ENTRIES)

    def prefix(self, name) -> Optional[OpDef]:
        return self._by_class["prefix"].get(name)

    def infix(self, name) -> Optional[OpDef]:
        return self._by_class["infix"].get(name)

    def postfix(self, name) -> Optional[OpDef]:
        return self._by_class["postfix"].get(name)

    def is_operator(self, name):
        return any(name in table for table in self._by_class.values())


DEFAULT_OPERATORS = OperatorTable.default()


def tokenize(text, file="<string>"):
    """Разбить текст на токены; комментарии отбрасываются."""
    tokens = []
    i = 0
    n = len(text)
    line = 1
    line_start = 0
    layout = True

    def error(message, at_line, at_col):
        raise PrologSyntaxError(message, file, at_line, at_col)

    while i < n:
        c = text[i]
        col = i - line_start + 1

        if c == "\n":
            i += 1
            line += 1
            line_start = i
            layout = True
            continue
        if c.isspace():
            i += 1
            layout = True
            continue
        if c == "%":
            while i < n and text[i] != "\n":
                i += 1
            layout = True
            continue
        if c == "/" and text.startswith("/*", i):
            end = text.find("*/", i + 2)
            if end < 0:
                error("unterminated block comment", line, col)
            chunk = text[i:end + 2]
            newlines = chunk.count("\n")
            if newlines:
                line += newlines
                line_start = i + chunk.rfind("\n") + 1
            i = end + 2
            layout = True
            continue

        start_line, start_col = line, col
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("int", int(text[i:j]), start_line, start_col, layout))
            i = j
        elif c == "_" or c.isupper():
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("var", text[i:j], start_line, start_col, layout))
            i = j
        elif c.isalpha():
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("atom", text[i:j], start_line, start_col, layout))
            i = j
        elif c == "'":
            j = i + 1
            chars = []
            while True:
                if j >= n:
                    error("unterminated quoted atom", start_line, start_col)
                ch = text[j]
                if ch == "'":
                    j += 1
                    break
                if ch == "\\":
                    if j + 1 >= n:
                        error("unterminated quoted atom", start_line, start_col)
                    escape = text[j + 1]
                    if escape not in ESCAPES:
                        error(f"unsupported escape sequence \\{escape}", line, j - line_start + 1)
                    chars.append(ESCAPES[escape])
                    j += 2
                    continue
                if ch == "\n":
                    line += 1
                    line_start = j + 1
                chars.append(ch)
                j += 1
            tokens.append(Token("atom", "".join(chars), start_line, start_col, layout, quoted=True))
            i = j
        elif c == "." and (i + 1 >= n or text[i + 1].isspace() or text[i + 1] == "%"):
            tokens.append(Token("end", ".", start_line, start_col, layout))
            i += 1
        elif c in SYMBOL_CHARS:
            j = i
            while j < n and text[j] in SYMBOL_CHARS:
                j += 1
            tokens.append(Token("atom", text[i:j], start_line, start_col, layout))
            i = j
        elif c in SOLO_CHARS:
            tokens.append(Token("atom", c, start_line, start_col, layout))
            i += 1
        elif c in PUNCT_CHARS:
            tokens.append(Token("punct", c, start_line, start_col, layout))
            i += 1
        else:
            error(f"unexpected character {c!r}", start_line, start_col)
        layout = False

    return tokens


class _Parser:
    def __init__(self, tokens, op_table, file, eof):
        self.tokens = tokens
        self.ops = op_table
        self.file = file
        self.eof = eof
        self.pos = 0
        self.item_start = None
        self.reset_vars()

    def reset_vars(self):
        self.var_map = {}
        self.var_count = 0

    def error(self, message, token=None):
        if token is None:
            line, column = self.eof
        else:
            line, column = token.line, token.column
        raise PrologSyntaxError(message, self.file, line, column, self.item_start)

    def peek(self, offset=0) -> Optional[Token]:
        index = self.pos + offset
        return self.tokens[index] if index < len(self.tokens) else None

    def next(self) -> Token:
        token = self.peek()
        if token is None:
            self.error("unexpected end of input")
        self.pos += 1
        return token

    def at_end(self):
        return self.pos >= len(self.tokens)

    def expect_punct(self, value):
        token = self.peek()
        if token is None:
            self.error(f"expected '{value}' but input ended")
        if token.kind != "punct" or token.value != value:
            self.error(f"expected '{value}' but found '{token.value}'", token)
        self.pos += 1

    def make_var(self, name):
        if name == "_":
            var = Var("_", self.var_count)
            self.var_count += 1
            return var
        if name not in self.var_map:
            self.var_map[name] = Var(name, self.var_count)
            self.var_count += 1
        return self.var_map[name]

    def is_terminator(self, token):
        if token is None or token.kind == "end":
            return True
        if token.kind == "punct":
            return token.value in (")", ",", "|", "]")
        if token.kind == "atom" and not token.quoted:
            after = self.peek(1)
            functional = after is not None and after.kind == "punct" and after.value == "(" and not after.layout_before
            if functional:
                return False
            return self.ops.infix(token.value) is not None and self.ops.prefix(token.value) is None
        return False

    def parse_arg(self):
        term, _ = self.parse(999)
        return term

    def parse_primary(self, max_prec):
        token = self.next()
        if token.kind == "int":
            return Int(token.value), 0
        if token.kind == "var":
            return self.make_var(token.value), 0
        if token.kind == "end":
            self.error("unexpected end of clause", token)
        if token.kind == "punct":
            if token.value == "(":
                term, _ = self.parse(1200)
                self.expect_punct(")")
                return term, 0
            if token.value == "[":
                nxt = self.peek()
                if nxt is not None and nxt.kind == "punct" and nxt.value == "]":
                    self.pos += 1
                    return NIL, 0
                items = [self.parse_arg()]
                while self._punct_ahead(","):
                    self.pos += 1
                    items.append(self.parse_arg())
                tail = NIL
                if self._punct_ahead("|"):
                    self.pos += 1
                    tail = self.parse_arg()
                self.expect_punct("]")
                return make_list(items, tail), 0
            self.error(f"unexpected '{token.value}'", token)

        name = token.value
        nxt = self.peek()
        if nxt is not None and nxt.kind == "punct" and nxt.value == "(" and not nxt.layout_before:
            self.pos += 1
            args = [self.parse_arg()]
            while self._punct_ahead(","):
                self.pos += 1
                args.append(self.parse_arg())
            self.expect_punct(")")
            return Compound(name, tuple(args)), 0
        if (
            name == "-"
            and not token.quoted
            and nxt is not None
            and nxt.kind == "int"
            and not nxt.layout_before
        ):
            self.pos += 1
            return Int(-nxt.value), 0
        prefix = None if token.quoted else self.ops.prefix(name)
        if prefix is not None and not self.is_terminator(nxt):
            if prefix.priority > max_prec:
                self.error(f"operator priority clash: '{name}' ({prefix.priority}) where {max_prec} allowed", token)
            arg_max = prefix.priority if prefix.type == "fy" else prefix.priority - 1
            operand, _ = self.parse(arg_max)
            return Compound(name, (operand,)), prefix.priority
        return Atom(name), 0

    def _punct_ahead(self, value):
        token = self.peek()
        return token is not None and token.kind == "punct" and token.value == value

    def parse(self, max_prec):
        left, left_prec = self.parse_primary(max_prec)
        while True:
            token = self.peek()
            if token is None:
                break
            if token.kind == "atom" and not token.quoted:
                name = token.value
            elif token.kind == "punct" and token.value == ",":
                name = ","
            else:
                break
            infix = self.ops.infix(name)
            if infix is not None:
                left_max = infix.priority - 1 if infix.type in ("xfx", "xfy") else infix.priority
                right_max = infix.priority - 1 if infix.type in ("xfx", "yfx") else infix.priority
                if infix.priority <= max_prec and left_prec <= left_max:
                    self.pos += 1
                    right, _ = self.parse(right_max)
                    left = Compound(name, (left, right))
                    left_prec = infix.priority
                    continue
            postfix = self.ops.postfix(name)
            if postfix is not None:
                left_max = postfix.priority - 1 if postfix.type == "xf" else postfix.priority
                if postfix.priority <= max_prec and left_prec <= left_max:
                    self.pos += 1
                    left = Compound(name, (left,))
                    left_prec = postfix.priority
                    continue
            break
        return left, left_prec

    def parse_item(self):
        """Один терм, завершённый точкой."""
        self.reset_vars()
        first = self.peek()
        self.item_start = (self.file, first.line, first.column)
        term, _ = self.parse(1200)
        token = self.peek()
        if token is None:
            self.error("unexpected end of input, expected '.'")
        if token.kind != "end":
            self.error(f"operator expected or priority clash at '{token.value}'", token)
        self.pos += 1
        return term, Location(self.file, first.line, first.column)


def parse_term(tokens, op_table=DEFAULT_OPERATORS, file="<string>"):
    """Разобрать ровно один терм (завершающая точка необязательна)."""
    if not tokens:
        raise PrologSyntaxError("empty input", file, 1, 1)
    last = tokens[-1]
    parser = _Parser(tokens, op_table, file, (last.line, last.column + 1))
    term, _ = parser.parse(1200)
    token = parser.peek()
    if token is not None and token.kind == "end":
        parser.pos += 1
        token = parser.peek()
    if token is not None:
        parser.error(f"operator expected or priority clash at '{token.value}'", token)
    return term


def read_term(text, op_table=DEFAULT_OPERATORS, file="<string>"):
    return parse_term(tokenize(text, file), op_table, file)


def _eof_location(text):
    lines = text.split("\n")
    return (len(lines), len(lines[-1]) + 1)


def parse_program(text, op_table=DEFAULT_OPERATORS, file="<string>"):
    """Разобрать программу в список SourceItem в порядке следования."""
    tokens = tokenize(text, file)
    parser = _Parser(tokens, op_table, file, _eof_location(text))
    items = []
    while not parser.at_end():
        term, location = parser.parse_item()
        if isinstance(term, Compound) and term.functor == ":-" and len(term.args) == 1:
            items.append(SourceItem("directive", term, location))
        else:
            items.append(SourceItem("clause", term, location))
    logger.debug(f"Prolog reader: Parsed {len(items)} items from {file}")
    return items


class DirectiveForm(Enum):
    MODULE_DECL = "module_decl"
    EXPORT_DECL = "export_decl"
    USE_MODULE = "use_module"
    META_PREDICATE = "meta_predicate"
    METAPREDICATE_ISO = "metapredicate_iso"
    MODULE_TRANSPARENT = "module_transparent"
    TOOL = "tool"
    DYNAMIC = "dynamic"
    MODE = "mode"
    OP = "op"
    UNKNOWN = "unknown"


DIRECTIVE_FORMS = {
    ("module", 1): DirectiveForm.MODULE_DECL,
    ("module", 2): DirectiveForm.MODULE_DECL,
    ("export", 1): DirectiveForm.EXPORT_DECL,
    ("use_module", 1): DirectiveForm.USE_MODULE,
    ("use_module", 2): DirectiveForm.USE_MODULE,
    ("meta_predicate", 1): DirectiveForm.META_PREDICATE,
    ("metapredicate", 1): DirectiveForm.METAPREDICATE_ISO,
    ("module_transparent", 1): DirectiveForm.MODULE_TRANSPARENT,
    ("tool", 2): DirectiveForm.TOOL,
    ("dynamic", 1): DirectiveForm.DYNAMIC,
    ("mode", 2): DirectiveForm.MODE,
    ("op", 3): DirectiveForm.OP,
}


def classify_directive(directive):
    """Форма директивы; неизвестные директивы классифицируются как UNKNOWN."""
    if isinstance(directive, Compound):
        return DIRECTIVE_FORMS.get((directive.functor, len(directive.args)), DirectiveForm.UNKNOWN)
    return DirectiveForm.UNKNOWN
