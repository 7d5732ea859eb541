"""Таблица встроенных предикатов и их шаблоны мета-аргументов."""

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

from . import reflect
from .engine import CutBarrier, Frame
from .exceptions import instantiation_error, permission_error, type_error
from .moduledb import Clause, Closure, ContextAware, MetaTemplate, Normal
from .terms import (
    TRUE,
    Atom,
    Compound,
    Int,
    Var,
    indicator,
    indicator_term,
    list_items,
    make_list,
    rename,
)
from .writer import term_to_text


@dataclass(frozen=True)
class Builtin:
    name: str
    arity: int
    handler: Callable
    template: Optional[MetaTemplate] = None
    meta_call: bool = False

    @property
    def indicator(self):
        return (self.name, self.arity)


def _spec(item):
    if isinstance(item, int):
        return Closure(item)
    if item == ":":
        return ContextAware()
    return Normal(item)


class BuiltinTable:
    def __init__(self):
        self._table = {}

    def register(self, name, arity, meta=None, meta_call=False):
        """Декоратор: meta задаёт шаблон кортежем, как в директиве meta_predicate/1."""

        def decorator(handler):
            template = None
            if meta is not None:
                template = MetaTemplate(name, arity, tuple(_spec(item) for item in meta))
            self._table[(name, arity)] = Builtin(name, arity, handler, template, meta_call)
            return handler

        return decorator

    def get(self, ind):
        builtin = self._table.get(ind)
        if builtin is None and ind[0] == "call" and ind[1] >= 1:
            return _call_builtin(ind[1])
        return builtin

    def __contains__(self, ind):
        return self.get(ind) is not None

    def indicators(self):
        return sorted(self._table)


BUILTINS = BuiltinTable()


def _sub(frame):
    return Frame(frame.ctx, frame.depth + 1, CutBarrier(), False)


# control

@BUILTINS.register(",", 2, meta=(0, 0))
def _conjunction(engine, args, frame):
    return engine.conjunction(args, frame)


@BUILTINS.register(";", 2, meta=(0, 0))
def _disjunction(engine, args, frame):
    return engine.disjunction(args, frame)


@BUILTINS.register("->", 2, meta=(0, 0))
def _if_then(engine, args, frame):
    return engine.if_then_else(args[0], args[1], None, frame)


@BUILTINS.register("\\+", 1, meta=(0,))
def _negation(engine, args, frame):
    return engine.negation(args[0], frame)


@BUILTINS.register("!", 0)
def _cut(engine, args, frame):
    return engine.cut(frame)


@lru_cache(maxsize=None)
def _call_builtin(arity):
    template = MetaTemplate("call", arity, (Closure(arity - 1),) + (Normal("?"),) * (arity - 1))
    return Builtin("call", arity, _call_n, template)


def _call_n(engine, args, frame):
    return engine.call_n(args, frame)


@BUILTINS.register("true", 0)
def _true(engine, args, frame):
    yield


@BUILTINS.register("fail", 0)
def _fail(engine, args, frame):
    return iter(())


@BUILTINS.register("false", 0)
def _false(engine, args, frame):
    return iter(())


@BUILTINS.register("catch", 3, meta=(0, "?", 0), meta_call=True)
def _catch(engine, args, frame):
    return engine.catch(args[0], args[1], args[2], frame)


@BUILTINS.register("throw", 1)
def _throw(engine, args, frame):
    engine.throw(args[0])


@BUILTINS.register("findall", 3, meta=("?", 0, "-"), meta_call=True)
def _findall(engine, args, frame):
    template, goal, result = args
    mark = engine.bindings.mark()
    found = [engine.copy(template) for _ in engine.run(goal, _sub(frame))]
    engine.bindings.undo(mark)
    if engine.unify(result, make_list(found)):
        yield


@BUILTINS.register("forall", 2, meta=(0, 0), meta_call=True)
def _forall(engine, args, frame):
    condition, action = args
    mark = engine.bindings.mark()
    holds = True
    for _ in engine.run(condition, _sub(frame)):
        inner = engine.bindings.mark()
        proved = engine.succeeds(action, _sub(frame))
        engine.bindings.undo(inner)
        if not proved:
            holds = False
            break
    engine.bindings.undo(mark)
    if holds:
        yield


# term comparison and construction

@BUILTINS.register("=", 2)
def _unify(engine, args, frame):
    if engine.unify(args[0], args[1]):
        yield


@BUILTINS.register("\\=", 2)
def _not_unifiable(engine, args, frame):
    mark = engine.bindings.mark()
    unifiable = engine.unify(args[0], args[1])
    engine.bindings.undo(mark)
    if not unifiable:
        yield


@BUILTINS.register("==", 2)
def _identical(engine, args, frame):
    if engine.bindings.resolve(args[0]) == engine.bindings.resolve(args[1]):
        yield


@BUILTINS.register("\\==", 2)
def _not_identical(engine, args, frame):
    if engine.bindings.resolve(args[0]) != engine.bindings.resolve(args[1]):
        yield


@BUILTINS.register("=..", 2)
def _univ(engine, args, frame):
    term = engine.deref(args[0])
    if isinstance(term, Compound):
        items = [Atom(term.functor), *term.args]
    elif not isinstance(term, Var):
        items = [term]
    else:
        items = list_items(args[1], engine.deref)
        if items is None or not items:
            raise instantiation_error()
        head = engine.deref(items[0])
        if isinstance(head, Var):
            raise instantiation_error()
        if len(items) == 1:
            built = head
        elif isinstance(head, Atom):
            built = Compound(head.name, tuple(items[1:]))
        else:
            raise type_error("atom", head)
        if engine.unify(term, built):
            yield
        return
    if engine.unify(args[1], make_list(items)):
        yield


@BUILTINS.register("functor", 3)
def _functor(engine, args, frame):
    term = engine.deref(args[0])
    if isinstance(term, Var):
        name, arity = engine.deref(args[1]), engine.deref(args[2])
        if isinstance(name, Var) or isinstance(arity, Var):
            raise instantiation_error()
        if not isinstance(arity, Int):
            raise type_error("integer", arity)
        if arity.value == 0:
            built = name
        elif isinstance(name, Atom):
            built = Compound(name.name, tuple(Var("_", next(engine.counter)) for _ in range(arity.value)))
        else:
            raise type_error("atomic", name)
        if engine.unify(term, built):
            yield
        return
    if isinstance(term, Compound):
        name, arity = Atom(term.functor), Int(len(term.args))
    else:
        name, arity = term, Int(0)
    if engine.unify(args[1], name) and engine.unify(args[2], arity):
        yield


@BUILTINS.register("copy_term", 2)
def _copy_term(engine, args, frame):
    if engine.unify(args[1], engine.copy(args[0])):
        yield


def _type_check(name, check):
    @BUILTINS.register(name, 1)
    def handler(engine, args, frame):
        if check(engine.deref(args[0])):
            yield

    return handler


_type_check("var", lambda t: isinstance(t, Var))
_type_check("nonvar", lambda t: not isinstance(t, Var))
_type_check("atom", lambda t: isinstance(t, Atom))
_type_check("integer", lambda t: isinstance(t, Int))
_type_check("callable", lambda t: isinstance(t, (Atom, Compound)))


# clause database

def _clause_parts(engine, term, frame):
    """(модуль, голова, тело) для аргумента assertz/retract, уже квалифицированного шаблоном."""
    module, clause = reflect.strip_module(term, frame.ctx, engine.deref)
    if isinstance(clause, Var) or isinstance(module, Var):
        raise instantiation_error()
    head, body = clause, TRUE
    if isinstance(clause, Compound) and clause.functor == ":-" and len(clause.args) == 2:
        head_module, head = reflect.strip_module(clause.args[0], frame.ctx._replace(calling=module), engine.deref)
        if isinstance(head_module, Var):
            raise instantiation_error()
        module, body = head_module, clause.args[1]
    if isinstance(head, Var):
        raise instantiation_error()
    if not isinstance(head, (Atom, Compound)):
        raise type_error("callable", head)
    return module, head, body


def _modifiable(engine, module, ind):
    if ind in engine.db.builtins:
        raise permission_error("modify", "static_procedure", indicator_term(ind))
    definition = engine.db.module(module)
    if definition is not None and ind in definition.imports:
        raise permission_error("modify", "static_procedure", indicator_term(ind))
    pred = engine.db.predicate(module, ind, create=False)
    if pred is not None and pred.clauses and not pred.dynamic:
        raise permission_error("modify", "static_procedure", indicator_term(ind))


def _assert(engine, args, frame, front):
    module, head, body = _clause_parts(engine, args[0], frame)
    resolved = engine.copy(Compound(":-", (head, body)))
    head, body = resolved.args
    if isinstance(body, Int):
        raise type_error("callable", body)
    ind = indicator(head)
    _modifiable(engine, module, ind)
    pred = engine.db.predicate(module, ind)
    pred.dynamic = True
    clause = Clause(head, body)
    if front:
        pred.clauses.insert(0, clause)
    else:
        pred.clauses.append(clause)
    yield


@BUILTINS.register("assertz", 1, meta=(":",), meta_call=True)
def _assertz(engine, args, frame):
    return _assert(engine, args, frame, front=False)


@BUILTINS.register("asserta", 1, meta=(":",), meta_call=True)
def _asserta(engine, args, frame):
    return _assert(engine, args, frame, front=True)


@BUILTINS.register("retract", 1, meta=(":",), meta_call=True)
def _retract(engine, args, frame):
    module, head, body = _clause_parts(engine, args[0], frame)
    ind = indicator(head)
    pred = engine.db.predicate(module, ind, create=False)
    if pred is None:
        return
    if pred.clauses and not pred.dynamic:
        raise permission_error("modify", "static_procedure", indicator_term(ind))
    bindings = engine.bindings
    for clause in list(pred.clauses):
        mark = bindings.mark()
        mapping = {}
        candidate_head = rename(clause.head, engine.counter, mapping)
        candidate_body = rename(clause.body, engine.counter, mapping)
        if engine.unify(head, candidate_head) and engine.unify(body, candidate_body):
            for index, stored in enumerate(pred.clauses):
                if stored is clause:
                    del pred.clauses[index]
                    break
            yield
        bindings.undo(mark)


# output

@BUILTINS.register("write", 1)
def _write(engine, args, frame):
    engine.write(term_to_text(engine.bindings.resolve(args[0]), quoted=False))
    yield


@BUILTINS.register("writeq", 1)
def _writeq(engine, args, frame):
    engine.write(term_to_text(engine.bindings.resolve(args[0]), quoted=True))
    yield


@BUILTINS.register("nl", 0)
def _nl(engine, args, frame):
    engine.write("\n")
    yield


# reflection

@BUILTINS.register("strip_module", 3)
def _strip_module(engine, args, frame):
    module, plain = reflect.strip_module(args[0], frame.ctx, engine.deref)
    module = module if isinstance(module, Var) else Atom(module)
    if engine.unify(args[1], module) and engine.unify(args[2], plain):
        yield


@BUILTINS.register("context_module", 1)
def _context_module(engine, args, frame):
    if engine.unify(args[0], Atom(reflect.context_module(frame.ctx))):
        yield


@BUILTINS.register("predicate_property", 2, meta=(":", "?"))
def _predicate_property(engine, args, frame):
    module, head = reflect.strip_module(args[0], frame.ctx, engine.deref)
    if isinstance(module, Var):
        raise instantiation_error()
    if isinstance(head, Var):
        heads = reflect.visible_heads(engine.db, module, engine.counter)
    elif isinstance(head, (Atom, Compound)):
        heads = [head]
    else:
        raise type_error("callable", head)
    bindings = engine.bindings
    for candidate in heads:
        for prop in reflect.predicate_properties(engine.db, module, indicator(candidate)):
            mark = bindings.mark()
            if engine.unify(head, candidate) and engine.unify(args[1], prop):
                yield
            bindings.undo(mark)

