"""Квалификация мета-аргументов, распространение префикса модуля через управляющие конструкции
и компиляционное расширение клауз."""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Union

from .exceptions import LoadError, type_error
from .moduledb import Closure, ContextAware, is_meta_spec
from .terms import Atom, Compound, Var, indicator, is_qualified, qualify

logger = logging.getLogger(__name__)

CONTROL_CONSTRUCTS = {(",", 2), (";", 2), ("->", 2), ("\\+", 1)}


@dataclass(frozen=True)
class SemanticsFlag:
    """Флаг только для чтения: True означает, что `M:G` меняет и контекст вызова."""

    colon_sets_calling_context: bool = True
    max_call_n: int = 255

    def __post_init__(self):
        if self.max_call_n < 1:
            raise ValueError(f"max_call_n must be at least 1, got {self.max_call_n}")

    @property
    def name(self):
        return "calling" if self.colon_sets_calling_context else "lookup"


@dataclass(frozen=True)
class QualifiedGoal:
    qualifier: Optional[Union[str, Var]]
    plain: object

    def term(self):
        if self.qualifier is None:
            return self.plain
        return qualify(self.qualifier, self.plain)


class MetaCallClass(Enum):
    CALLER_QUALIFIED = "caller_qualified"
    LOCAL = "local"


def _identity(term):
    return term


def is_control(term):
    if isinstance(term, Atom):
        return False
    return isinstance(term, Compound) and (term.functor, len(term.args)) in CONTROL_CONSTRUCTS


def propagates(term):
    """Цели, через которые распространяется квалификатор: конструкции управления, call/N, catch/3."""
    if not isinstance(term, Compound):
        return False
    if is_control(term) or term.functor == "call":
        return True
    return term.functor == "catch" and len(term.args) == 3


def normalize_qualifiers(term, walk=None) -> QualifiedGoal:
    """Снять цепочку `M1:(M2:G)`; побеждает самый внутренний квалификатор."""
    walk = walk or _identity
    qualifier = None
    term = walk(term)
    while is_qualified(term):
        module = walk(term.args[0])
        if isinstance(module, Atom):
            qualifier = module.name
        elif isinstance(module, Var):
            qualifier = module
        else:
            raise type_error("module", module)
        term = walk(term.args[1])
    return QualifiedGoal(qualifier, term)


def single_qualified(arg, context, walk=None):
    qualified = normalize_qualifiers(arg, walk)
    if qualified.qualifier is None:
        return qualify(context, arg)
    return qualified.term()


def qualify_meta_args(goal, template, context, walk=None):
    """Обернуть неквалифицированные мета-аргументы в `context:Arg`."""
    if template is None or not isinstance(goal, Compound):
        return goal
    walk = walk or _identity
    args = list(goal.args)
    changed = False
    for position, spec in enumerate(template.specs):
        if not is_meta_spec(spec):
            continue
        arg = walk(args[position])
        if is_qualified(arg):
            single = single_qualified(arg, context, walk)
            if single != arg:
                args[position] = single
                changed = True
            continue
        args[position] = qualify(context, args[position])
        changed = True
    if not changed:
        return goal
    return Compound(goal.functor, tuple(args))


def propagate_control(module, goal, walk=None):
    """Распространить квалификатор по аргументам управляющих конструкций, кроме уже квалифицированных."""
    walk = walk or _identity

    def wrap(sub):
        target = walk(sub)
        if is_qualified(target):
            return sub
        if isinstance(target, Compound) and is_control(target):
            return propagate_control(module, target, walk)
        return qualify(module, sub)

    goal = walk(goal)
    if not isinstance(goal, Compound):
        return qualify(module, goal)
    name, arity = goal.functor, len(goal.args)
    if name == ";" and arity == 2:
        left = walk(goal.args[0])
        if isinstance(left, Compound) and left.functor == "->" and len(left.args) == 2:
            condition = Compound("->", (wrap(left.args[0]), wrap(left.args[1])))
            return Compound(";", (condition, wrap(goal.args[1])))
    if is_control(goal):
        return Compound(name, tuple(wrap(arg) for arg in goal.args))
    if name == "call":
        return Compound(name, (wrap(goal.args[0]),) + goal.args[1:])
    if name == "catch" and arity == 3:
        return Compound(name, (wrap(goal.args[0]), goal.args[1], wrap(goal.args[2])))
    return qualify(module, goal)


def head_meta_vars(head, template):
    """Переменные головы клаузы, стоящие в мета-позициях шаблона."""
    if template is None or not isinstance(head, Compound):
        return []
    found = []
    for position in template.meta_positions():
        arg = head.args[position]
        if isinstance(arg, Var) and arg not in found:
            found.append(arg)
    return found


def classify_meta_call(clause, template, body_goal):
    if isinstance(body_goal, Var) and body_goal in head_meta_vars(clause.head, template):
        return MetaCallClass.CALLER_QUALIFIED
    return MetaCallClass.LOCAL


def callee_template(db, module, goal):
    """Шаблон вызываемого предиката (пользовательского или встроенного) или None."""
    if not isinstance(goal, (Atom, Compound)):
        return None
    try:
        resolution = db.lookup(module, indicator(goal))
    except LoadError:
        return None
    return resolution.template


class ClauseExpander:
    def __init__(self, db, module, clause, template):
        self.db = db
        self.module = module
        self.clause = clause
        self.template = template
        self.changes = 0

    def expand(self, goal):
        if isinstance(goal, Var) or is_qualified(goal):
            return goal
        if is_control(goal):
            return Compound(goal.functor, tuple(self.expand(arg) for arg in goal.args))
        template = callee_template(self.db, self.module, goal)
        if template is None or not isinstance(goal, Compound):
            return goal
        args = list(goal.args)
        for position, spec in enumerate(template.specs):
            if not is_meta_spec(spec):
                continue
            arg = args[position]
            if is_qualified(arg):
                continue
            if classify_meta_call(self.clause, self.template, arg) is MetaCallClass.CALLER_QUALIFIED:
                continue
            args[position] = qualify(self.module, arg)
            self.changes += 1
        return Compound(goal.functor, tuple(args))


def expand_clause(db, module, clause, flags=None):
    """Квалифицировать мета-аргументы вызовов с известным шаблоном именем модуля клаузы."""
    pred = db.predicate(module, indicator(clause.head), create=False)
    if pred is not None and pred.transparent:
        return clause
    template = pred.template if pred is not None else None
    expander = ClauseExpander(db, module, clause, template)
    body = expander.expand(clause.body)
    if not expander.changes:
        return clause
    return replace(clause, body=body)


def expand_module(db, module, flags=None):
    """Расширить все клаузы модуля на месте; возвращает число изменённых клауз."""
    changed = 0
    for pred in db.modules[module].predicates.values():
        for index, clause in enumerate(pred.clauses):
            expanded = expand_clause(db, module, clause, flags)
            if expanded is not clause:
                pred.clauses[index] = expanded
                changed += 1
    if changed:
        logger.debug(f"Prolog expander: Expanded {changed} clauses in module '{module}'")
    return changed


def closure_arity(spec):
    if isinstance(spec, Closure):
        return spec.n
    if isinstance(spec, ContextAware):
        return 0
    return None
