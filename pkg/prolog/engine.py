"""Движок резолюции: унификация, перебор с возвратами, контексты исполнения и квалификация целей."""

import itertools
import logging
import sys
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .exceptions import (
    LoadError,
    PrologError,
    existence_error,
    instantiation_error,
    permission_error,
    representation_error,
    resource_error,
    type_error,
)
from .expander import SemanticsFlag, normalize_qualifiers, propagate_control, propagates, qualify_meta_args
from .moduledb import USER
from .reader import read_term
from .terms import (
    TRUE,
    Atom,
    Compound,
    Var,
    add_args,
    format_indicator,
    indicator,
    qualified_indicator,
    qualify,
    rename,
)
from .writer import term_to_text

logger = logging.getLogger(__name__)

CONTROL = {(",", 2), (";", 2), ("->", 2), ("\\+", 1), ("!", 0)}


class ExecutionContext(NamedTuple):
    calling: str
    definition: str
    lookup: str

    @classmethod
    def top(cls, module=USER):
        return cls(module, module, module)


class CutBarrier:
    """Отметка входа в клаузу (или в call/N): `!` отсекает альтернативы до неё."""

    __slots__ = ("cut",)

    def __init__(self):
        self.cut = False


class Frame(NamedTuple):
    ctx: ExecutionContext
    depth: int
    barrier: CutBarrier
    direct: bool = False


@dataclass(frozen=True)
class EngineOptions:
    semantics: SemanticsFlag = field(default_factory=SemanticsFlag)
    occurs_check: bool = False
    strict_scope: bool = False
    max_depth: Optional[int] = None
    max_solutions: Optional[int] = None


class Bindings:
    """Подстановка с трейлом: mark() запоминает позицию, undo() откатывает привязки."""

    def __init__(self):
        self.values = {}
        self.trail = []

    def deref(self, term):
        values = self.values
        while isinstance(term, Var):
            bound = values.get(term)
            if bound is None:
                return term
            term = bound
        return term

    def bind(self, var, term):
        self.values[var] = term
        self.trail.append(var)

    def mark(self):
        return len(self.trail)

    def undo(self, mark):
        trail, values = self.trail, self.values
        while len(trail) > mark:
            del values[trail.pop()]

    def resolve(self, term):
        term = self.deref(term)
        if isinstance(term, Compound):
            return Compound(term.functor, tuple(self.resolve(arg) for arg in term.args))
        return term

    def occurs(self, var, term):
        stack = [term]
        while stack:
            current = self.deref(stack.pop())
            if current == var:
                return True
            if isinstance(current, Compound):
                stack.extend(current.args)
        return False


def unify(left, right, bindings, occurs_check=False):
    """Расширить подстановку до наиболее общего унификатора; False при неудаче."""
    stack = [(left, right)]
    while stack:
        a, b = stack.pop()
        a, b = bindings.deref(a), bindings.deref(b)
        if a == b:
            continue
        if isinstance(a, Var):
            if occurs_check and bindings.occurs(a, b):
                return False
            bindings.bind(a, b)
        elif isinstance(b, Var):
            if occurs_check and bindings.occurs(b, a):
                return False
            bindings.bind(b, a)
        elif isinstance(a, Compound) and isinstance(b, Compound):
            if a.functor != b.functor or len(a.args) != len(b.args):
                return False
            stack.extend(zip(a.args, b.args))
        else:
            return False
    return True


@dataclass(frozen=True)
class Solution:
    """Ответ на запрос: привязки именованных переменных запроса."""

    bindings: dict

    def __getitem__(self, name):
        return self.bindings[name]

    def lines(self):
        return [f"{name} = {term_to_text(value)}" for name, value in self.bindings.items()]

    def as_text(self):
        return {name: term_to_text(value) for name, value in self.bindings.items()}


class Engine:
    def __init__(self, db, options=None, output=None):
        self.db = db
        self.options = options or EngineOptions()
        self.flags = self.options.semantics
        self.output = output if output is not None else sys.stdout
        self.bindings = Bindings()
        self.counter = itertools.count()
        self.meta_calls = 0
        self.scope_warnings = []

    # public API

    def query(self, text, ctx=None):
        return self.solve(read_term(text, file="<query>"), ctx)

    def solve(self, goal, ctx=None):
        """Ленивая последовательность решений цели; счётчики сбрасываются на каждый запрос."""
        self.meta_calls = 0
        self.scope_warnings = []
        mapping = {}
        goal = rename(goal, self.counter, mapping)
        named = [(var.name, fresh) for var, fresh in mapping.items() if not var.name.startswith("_")]
        ctx = ctx or ExecutionContext.top()
        limit = self.options.max_solutions
        mark = self.bindings.mark()
        count = 0
        try:
            for _ in self.run(goal, Frame(ctx, 0, CutBarrier(), True)):
                count += 1
                yield Solution({name: self.bindings.resolve(var) for name, var in named})
                if limit is not None and count >= limit:
                    return
        except RecursionError:
            raise resource_error("stack") from None
        except PrologError as error:
            raise PrologError(self.copy(error.ball)) from None
        finally:
            self.bindings.undo(mark)

    def write(self, text):
        self.output.write(text)

    def unify(self, left, right):
        return unify(left, right, self.bindings, self.options.occurs_check)

    def deref(self, term):
        return self.bindings.deref(term)

    def copy(self, term):
        return rename(self.bindings.resolve(term), self.counter)

    def succeeds(self, goal, frame):
        """Найти первое решение; привязки остаются, откат за вызывающим."""
        solutions = iter(self.run(goal, frame))
        try:
            for _ in solutions:
                return True
            return False
        finally:
            close = getattr(solutions, "close", None)
            if close is not None:
                close()

    # resolution

    def run(self, goal, frame):
        raw = goal
        goal = self.bindings.deref(goal)
        if isinstance(raw, Var):
            if isinstance(goal, Var):
                raise instantiation_error()
            goal = Compound("call", (goal,))
        if not isinstance(goal, (Atom, Compound)):
            raise type_error("callable", goal)
        limit = self.options.max_depth
        if limit is not None and frame.depth > limit:
            raise resource_error("depth")
        key = indicator(goal)
        if key == (":", 2):
            return self._qualified(goal, frame)
        if key in CONTROL:
            builtin = self.db.builtins.get(key)
            return builtin.handler(self, goal.args if isinstance(goal, Compound) else (), frame)
        return self.call_predicate(goal, frame)

    def _qualified(self, goal, frame):
        qualified = normalize_qualifiers(goal, self.bindings.deref)
        module, plain = qualified.qualifier, qualified.plain
        if isinstance(module, Var) or isinstance(plain, Var):
            raise instantiation_error()
        if not isinstance(plain, (Atom, Compound)):
            raise type_error("callable", plain)
        ctx = frame.ctx
        colon_sets_calling = self.flags.colon_sets_calling_context
        calling = module if colon_sets_calling else ctx.calling
        if propagates(plain):
            rewritten = propagate_control(calling, plain, self.bindings.deref)
            return self.run(rewritten, frame._replace(direct=frame.direct and colon_sets_calling))
        if frame.direct:
            self._check_scope(module, plain)
        target = frame._replace(ctx=ExecutionContext(calling, ctx.definition, module))
        return self.call_predicate(plain, target, true_caller=ctx.calling)

    def _check_scope(self, module, goal):
        if module == USER:
            return
        definition = self.db.module(module)
        ind = indicator(goal)
        if definition is None or ind not in definition.predicates or ind in definition.exports:
            return
        text = f"{module}:{format_indicator(ind)}"
        self.scope_warnings.append(text)
        logger.warning(f"Prolog engine: Non-exported predicate {text} called through explicit qualification")
        if self.options.strict_scope:
            raise permission_error("access", "private_procedure", qualified_indicator(module, ind))

    def call_predicate(self, goal, frame, true_caller=None):
        ctx = frame.ctx
        ind = indicator(goal)
        try:
            resolution = self.db.lookup(ctx.lookup, ind)
        except LoadError as e:
            logger.error(f"Prolog engine: {e}")
            raise existence_error(ctx.lookup, ind) from None
        if resolution.kind == "builtin":
            builtin = resolution.builtin
            if builtin.template is not None:
                goal = qualify_meta_args(goal, builtin.template, ctx.calling, self.bindings.deref)
                if builtin.meta_call:
                    self.meta_calls += 1
            return builtin.handler(self, goal.args if isinstance(goal, Compound) else (), frame)
        if resolution.kind == "tool":
            caller = true_caller if true_caller is not None else ctx.calling
            name, _ = resolution.tool_impl
            args = goal.args if isinstance(goal, Compound) else ()
            impl = Compound(name, args + (Atom(caller),))
            target = ExecutionContext(ctx.calling, ctx.definition, resolution.module)
            return self.call_predicate(impl, frame._replace(ctx=target))
        pred = resolution.predicate
        if pred is None or (not pred.clauses and not pred.dynamic):
            raise existence_error(ctx.lookup, ind)
        if pred.template is not None:
            goal = qualify_meta_args(goal, pred.template, ctx.calling, self.bindings.deref)
            self.meta_calls += len(pred.template.meta_positions())
        calling = ctx.calling if pred.transparent else resolution.module
        callee = ExecutionContext(calling, resolution.module, resolution.module)
        return self._resolve(goal, pred, callee, frame.depth + 1)

    def _resolve(self, goal, pred, ctx, depth):
        barrier = CutBarrier()
        bindings = self.bindings
        for clause in list(pred.clauses):
            mark = bindings.mark()
            mapping = {}
            head = rename(clause.head, self.counter, mapping)
            if self.unify(head, goal):
                if clause.body == TRUE:
                    yield
                else:
                    body = rename(clause.body, self.counter, mapping)
                    yield from self.run(body, Frame(ctx, depth, barrier, not clause.generated))
            bindings.undo(mark)
            if barrier.cut:
                return

    # control constructs

    def conjunction(self, args, frame):
        barrier = frame.barrier
        for _ in self.run(args[0], frame):
            yield from self.run(args[1], frame)
            if barrier.cut:
                return

    def disjunction(self, args, frame):
        left = self.bindings.deref(args[0])
        if isinstance(left, Compound) and left.functor == "->" and len(left.args) == 2:
            yield from self.if_then_else(left.args[0], left.args[1], args[1], frame)
            return
        mark = self.bindings.mark()
        yield from self.run(args[0], frame)
        if frame.barrier.cut:
            return
        self.bindings.undo(mark)
        yield from self.run(args[1], frame)

    def if_then_else(self, condition, then, otherwise, frame):
        mark = self.bindings.mark()
        test = Frame(frame.ctx, frame.depth, CutBarrier(), frame.direct)
        if self.succeeds(condition, test):
            yield from self.run(then, frame)
            return
        self.bindings.undo(mark)
        if otherwise is not None:
            yield from self.run(otherwise, frame)

    def negation(self, goal, frame):
        mark = self.bindings.mark()
        proved = self.succeeds(goal, Frame(frame.ctx, frame.depth, CutBarrier(), frame.direct))
        self.bindings.undo(mark)
        if not proved:
            yield

    def cut(self, frame):
        yield
        frame.barrier.cut = True

    def call_n(self, args, frame):
        if len(args) > self.flags.max_call_n:
            raise representation_error("max_call_n_exceeded")
        self.meta_calls += 1
        qualified = normalize_qualifiers(args[0], self.bindings.deref)
        closure = qualified.plain
        if isinstance(closure, Var):
            raise instantiation_error()
        if not isinstance(closure, (Atom, Compound)):
            raise type_error("callable", closure)
        goal = add_args(closure, args[1:])
        if qualified.qualifier is not None:
            goal = qualify(qualified.qualifier, goal)
        return self.run(goal, Frame(frame.ctx, frame.depth + 1, CutBarrier(), False))

    def catch(self, goal, catcher, recovery, frame):
        mark = self.bindings.mark()
        inner = Frame(frame.ctx, frame.depth + 1, CutBarrier(), False)
        solutions = None
        while True:
            try:
                if solutions is None:
                    solutions = iter(self.run(goal, inner))
                next(solutions)
            except StopIteration:
                return
            except RecursionError:
                ball = resource_error("stack").ball
            except PrologError as error:
                ball = error.ball
            else:
                yield
                continue
            self.bindings.undo(mark)
            ball = rename(ball, self.counter)
            if self.unify(catcher, ball):
                yield from self.run(recovery, Frame(frame.ctx, frame.depth + 1, CutBarrier(), False))
                return
            self.bindings.undo(mark)
            raise PrologError(ball)

    def throw(self, ball):
        ball = self.bindings.deref(ball)
        if isinstance(ball, Var):
            raise instantiation_error()
        raise PrologError(self.copy(ball))


def run_query(db, text, options=None, output=None):
    """Все решения запроса списком; удобно для тестов и сервисов."""
    engine = Engine(db, options, output)
    return list(engine.query(text)), engine
