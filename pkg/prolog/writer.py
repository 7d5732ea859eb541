"""Каноническая запись термов: операторы в инфиксной форме, переменные как _N."""

import re

from .reader import DEFAULT_OPERATORS, SOLO_CHARS, SYMBOL_CHARS
from .terms import Atom, Compound, Int, Var, term_vars

LETTER_ATOM = re.compile(r"^[a-z][a-zA-Z0-9_]*$")
SPECIAL_ATOMS = {"[]", "!", ";"}
QUOTE_ESCAPES = {"\\": "\\\\", "'": "\\'", "\n": "\\n", "\t": "\\t"}


def atom_needs_quotes(name):
    if LETTER_ATOM.match(name) or name in SPECIAL_ATOMS:
        return False
    if name and all(c in SYMBOL_CHARS for c in name):
        return False
    return True


def format_atom(name, quoted):
    if quoted and atom_needs_quotes(name):
        return "'" + "".join(QUOTE_ESCAPES.get(c, c) for c in name) + "'"
    return name


def _is_symbolic(ch):
    return ch in SYMBOL_CHARS


def _is_alnum(ch):
    return ch.isalnum() or ch == "_"


def _glue(left, right):
    """Склеить фрагменты, вставив пробел там, где иначе слились бы токены."""
    if not left or not right:
        return left + right
    a, b = left[-1], right[0]
    if (_is_symbolic(a) and _is_symbolic(b)) or (_is_alnum(a) and _is_alnum(b)):
        return f"{left} {right}"
    return left + right


class TermWriter:
    def __init__(self, quoted=True, ops=DEFAULT_OPERATORS, var_name=None):
        self.quoted = quoted
        self.ops = ops
        self.var_name = var_name or (lambda v: f"_{v.id}")

    def write(self, term, max_prec=1200):
        if isinstance(term, Var):
            return self.var_name(term)
        if isinstance(term, Int):
            return str(term.value)
        if isinstance(term, Atom):
            text = format_atom(term.name, self.quoted)
            if max_prec < 1200 and self.ops.is_operator(term.name) and term.name not in SOLO_CHARS:
                if max_prec < 999:
                    return f"({text})"
            return text
        return self._compound(term, max_prec)

    def _arg(self, term):
        return self.write(term, 999)

    def _compound(self, term, max_prec):
        name, args = term.functor, term.args
        if name == "." and len(args) == 2:
            return self._list(term)
        if len(args) == 2:
            op = self.ops.infix(name)
            if op is not None:
                left_max = op.priority - 1 if op.type in ("xfx", "xfy") else op.priority
                right_max = op.priority - 1 if op.type in ("xfx", "yfx") else op.priority
                left = self.write(args[0], left_max)
                right = self.write(args[1], right_max)
                symbol = "," if name == "," else format_atom(name, self.quoted)
                if _is_alnum(symbol[0]):
                    text = f"{left} {symbol} {right}"
                else:
                    text = _glue(_glue(left, symbol), right)
                return f"({text})" if op.priority > max_prec else text
        if len(args) == 1:
            op = self.ops.prefix(name)
            if op is not None:
                arg_max = op.priority if op.type == "fy" else op.priority - 1
                operand = self.write(args[0], arg_max)
                symbol = format_atom(name, self.quoted)
                if name in ("-", "+") and operand[:1].isdigit():
                    # -(1) and -(1^2) must not read back with the integer -1
                    text = f"{symbol} {operand}"
                elif operand.startswith("("):
                    text = f"{symbol} {operand}"
                else:
                    text = _glue(symbol, operand)
                return f"({text})" if op.priority > max_prec else text
            post = self.ops.postfix(name)
            if post is not None:
                arg_max = post.priority if post.type == "yf" else post.priority - 1
                text = _glue(self.write(args[0], arg_max), format_atom(name, self.quoted))
                return f"({text})" if post.priority > max_prec else text
        functor = "'[]'" if self.quoted and name == "[]" else format_atom(name, self.quoted)
        return f"{functor}({','.join(self._arg(a) for a in args)})"

    def _list(self, term):
        items = []
        while isinstance(term, Compound) and term.functor == "." and len(term.args) == 2:
            items.append(self._arg(term.args[0]))
            term = term.args[1]
        text = ",".join(items)
        if term == Atom("[]"):
            return f"[{text}]"
        return f"[{text}|{self._arg(term)}]"


def term_to_text(term, quoted=True):
    return TermWriter(quoted=quoted).write(term)


def _letter_names(term):
    names = {}
    for index, var in enumerate(term_vars(term)):
        letter = chr(ord("A") + index % 26)
        names[var] = letter if index < 26 else f"{letter}{index // 26}"
    return names


def readable_clause(head, body):
    """Клауза с переменными A, B, ... в порядке появления."""
    term = head if body == Atom("true") else Compound(":-", (head, body))
    names = _letter_names(term)
    return TermWriter(quoted=True, var_name=lambda v: names[v]).write(term) + "."


def program_text(db):
    """Программа в исходном синтаксисе: директивы и клаузы каждого модуля."""
    writer = TermWriter(quoted=True)
    lines = []
    for name in db.order:
        definition = db.modules[name]
        chunk = [f":- {writer.write(record.term)}." for record in definition.directives]
        for pred in definition.predicates.values():
            chunk.extend(readable_clause(clause.head, clause.body) for clause in pred.clauses)
        if chunk:
            if lines:
                lines.append("")
            lines.extend(chunk)
    return "\n".join(lines) + ("\n" if lines else "")
