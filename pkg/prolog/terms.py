"""Термы интерпретатора: переменные, атомы, целые числа и составные термы."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Union


@dataclass(frozen=True)
class Var:
    """Логическая переменная. Идентичность определяется парой (name, id)."""

    name: str
    id: int

    def __str__(self):
        return f"_{self.id}"


@dataclass(frozen=True)
class Atom:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Int:
    value: int

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Compound:
    """Составной терм; арность всегда >= 1."""

    functor: str
    args: tuple

    def __post_init__(self):
        if not self.args:
            raise ValueError(f"Compound '{self.functor}' must have at least one argument")
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))

    @property
    def arity(self):
        return len(self.args)

    def __str__(self):
        return f"{self.functor}({', '.join(str(a) for a in self.args)})"


Term = Union[Var, Atom, Int, Compound]
Indicator = tuple  # (name, arity)

NIL = Atom("[]")
TRUE = Atom("true")
EMPTY = Atom("")


def make(functor, *args):
    """Атом при пустом списке аргументов, иначе составной терм."""
    if not args:
        return Atom(functor)
    return Compound(functor, tuple(args))


def qualify(module, goal):
    """Построить `module:goal`; module может быть именем или термом."""
    qualifier = Atom(module) if isinstance(module, str) else module
    return Compound(":", (qualifier, goal))


def is_qualified(term):
    return isinstance(term, Compound) and term.functor == ":" and len(term.args) == 2


def is_callable(term):
    return isinstance(term, (Atom, Compound))


def indicator(term):
    """Индикатор (name, arity) вызываемого терма."""
    if isinstance(term, Atom):
        return (term.name, 0)
    if isinstance(term, Compound):
        return (term.functor, len(term.args))
    raise TypeError(f"Not callable: {term!r}")


def indicator_term(ind):
    name, arity = ind
    return Compound("/", (Atom(name), Int(arity)))


def qualified_indicator(module, ind):
    """`M:Name/Arity` в форме, в которой его читает парсер: `(M:Name)/Arity`."""
    name, arity = ind
    return Compound("/", (qualify(module, Atom(name)), Int(arity)))


def format_indicator(ind):
    return f"{ind[0]}/{ind[1]}"


def parse_indicator(term):
    """Разобрать `Name/Arity`; None, если терм не является индикатором."""
    if (
        isinstance(term, Compound)
        and term.functor == "/"
        and len(term.args) == 2
        and isinstance(term.args[0], Atom)
        and isinstance(term.args[1], Int)
        and term.args[1].value >= 0
    ):
        return (term.args[0].name, term.args[1].value)
    return None


def add_args(term, extra):
    """Дополнить замыкание аргументами: f -> f(E...), f(A...) -> f(A..., E...)."""
    extra = tuple(extra)
    if not extra:
        return term
    if isinstance(term, Atom):
        return Compound(term.name, extra)
    if isinstance(term, Compound):
        return Compound(term.functor, term.args + extra)
    raise TypeError(f"Not callable: {term!r}")


def make_list(items: Iterable, tail=NIL):
    result = tail
    for item in reversed(list(items)):
        result = Compound(".", (item, result))
    return result


def list_items(term, walk=None):
    """Элементы собственного списка или None для частичных/несобственных списков."""
    walk = walk or (lambda t: t)
    items = []
    term = walk(term)
    while isinstance(term, Compound) and term.functor == "." and len(term.args) == 2:
        items.append(term.args[0])
        term = walk(term.args[1])
    if term != NIL:
        return None
    return items


def conjuncts(body) -> Iterator:
    """Цели конъюнкции слева направо."""
    while isinstance(body, Compound) and body.functor == "," and len(body.args) == 2:
        yield from conjuncts(body.args[0])
        body = body.args[1]
    yield body


def conjunction(goals):
    goals = list(goals)
    if not goals:
        return TRUE
    result = goals[-1]
    for goal in reversed(goals[:-1]):
        result = Compound(",", (goal, result))
    return result


def term_vars(term) -> list:
    """Переменные терма в порядке первого появления."""
    seen = []
    stack = [term]
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            if t not in seen:
                seen.append(t)
        elif isinstance(t, Compound):
            stack.extend(reversed(t.args))
    return seen


def contains_var(term, var):
    return var in term_vars(term)


def substitute(term, mapping):
    """Заменить переменные по словарю Var -> Term."""
    if isinstance(term, Var):
        return mapping.get(term, term)
    if isinstance(term, Compound):
        return Compound(term.functor, tuple(substitute(a, mapping) for a in term.args))
    return term


def rename(term, counter, mapping=None):
    """Переименовать переменные свежими id; mapping разделяется между вызовами."""
    if mapping is None:
        mapping = {}
    if isinstance(term, Var):
        if term not in mapping:
            mapping[term] = Var(term.name, next(counter))
        return mapping[term]
    if isinstance(term, Compound):
        return Compound(term.functor, tuple(rename(a, counter, mapping) for a in term.args))
    return term


def variant_key(term):
    """Ключ, совпадающий у термов-вариантов (равных с точностью до имён переменных)."""
    numbering = {}

    def walk(t):
        if isinstance(t, Var):
            if t not in numbering:
                numbering[t] = len(numbering)
            return ("$VAR", numbering[t])
        if isinstance(t, Compound):
            return (t.functor, tuple(walk(a) for a in t.args))
        if isinstance(t, Int):
            return ("$INT", t.value)
        return ("$ATOM", t.name)

    return walk(term)


def items_of(term):
    """Элементы списка, операнды конъюнкции или сам терм (аргументы директив)."""
    items = list_items(term)
    if items is not None:
        return items
    return list(conjuncts(term))
