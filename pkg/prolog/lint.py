"""Статический анализ мета-предикатов: правила безопасных определений, гигиена директив, переносимость."""

import logging
from dataclasses import dataclass
from typing import Optional

from .builtins import BUILTINS
from .exceptions import DirectiveError, LoadError
from .expander import MetaCallClass, classify_meta_call
from .moduledb import Closure, Normal, is_meta_spec, normalize_template
from .reader import DirectiveForm, Location
from .terms import Atom, Compound, Var, format_indicator, indicator, is_qualified, items_of, parse_indicator, term_vars

logger = logging.getLogger(__name__)

SEVERITIES = ("info", "warning", "error")
CONTROL = {(",", 2), (";", 2), ("->", 2), ("\\+", 1)}
UNKNOWN_LOCATION = Location("<unknown>", 0, 0)


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    severity: str
    location: Optional[Location]
    message: str
    predicate: Optional[tuple] = None

    def __post_init__(self):
        if self.severity not in SEVERITIES:
            raise ValueError(f"Unknown severity: {self.severity}")

    @property
    def where(self):
        return self.location or UNKNOWN_LOCATION

    def sort_key(self):
        where = self.where
        return (where.file, where.line, where.column, self.rule, self.message)

    def record(self):
        where = self.where
        return f"{where.file}:{where.line}:{where.column} {self.rule} {self.severity} {self.message}"

    def text(self):
        return f"{self.where}: {self.severity}: {self.message} [{self.rule}]"

    def at_least(self, severity):
        return SEVERITIES.index(self.severity) >= SEVERITIES.index(severity)


def sort_diagnostics(diagnostics):
    return sorted(diagnostics, key=Diagnostic.sort_key)


def exit_code(diagnostics):
    """0: чисто или только info; 1: есть предупреждения или ошибки."""
    return 1 if any(d.at_least("warning") for d in diagnostics) else 0


def _ind_text(ind):
    return format_indicator(ind)


def _positions_text(positions):
    numbers = [str(p + 1) for p in positions]
    if len(numbers) == 2:
        return f"{numbers[0]} and {numbers[1]}"
    return ", ".join(numbers[:-1]) + f" and {numbers[-1]}"


def _template_lookup(db, module, goal):
    if not isinstance(goal, (Atom, Compound)):
        return None
    if db is None:
        builtin = BUILTINS.get(indicator(goal))
        return builtin.template if builtin is not None else None
    try:
        return db.lookup(module, indicator(goal)).template
    except LoadError:
        return None


def walk_goals(body, db=None, module=None):
    """Пары (цель, модуль поиска): через управляющие конструкции и вложенные вызываемые мета-аргументы."""
    stack = [(body, module)]
    while stack:
        goal, lookup = stack.pop()
        yield goal, lookup
        if not isinstance(goal, Compound):
            continue
        if is_qualified(goal):
            qualifier, inner = goal.args
            if isinstance(inner, (Atom, Compound)):
                stack.append((inner, qualifier.name if isinstance(qualifier, Atom) else lookup))
            continue
        if (goal.functor, len(goal.args)) in CONTROL:
            stack.extend((arg, lookup) for arg in reversed(goal.args))
            continue
        template = _template_lookup(db, lookup, goal)
        if template is None:
            continue
        for position in reversed(template.meta_positions()):
            arg = goal.args[position]
            if isinstance(arg, (Atom, Compound)):
                stack.append((arg, lookup))


def meta_calls(body, db, module):
    """Тройки (вызов, цель мета-вызова, число добавочных аргументов) для call/N и мета-позиций шаблонов."""
    found = []
    for goal, lookup in walk_goals(body, db, module):
        if not isinstance(goal, Compound) or (goal.functor, len(goal.args)) in CONTROL or is_qualified(goal):
            continue
        if goal.functor == "call":
            found.append((goal, goal.args[0], len(goal.args) - 1))
            continue
        template = _template_lookup(db, lookup, goal)
        if template is None:
            continue
        for position in template.meta_positions():
            spec = template.specs[position]
            extra = spec.n if isinstance(spec, Closure) else 0
            found.append((goal, goal.args[position], extra))
    return found


def check_sr1(clause, template):
    """Мета-аргументы головы клаузы должны быть переменными."""
    head = clause.head
    if template is None or not isinstance(head, Compound):
        return []
    ind = template.indicator
    diagnostics = []
    seen = {}
    for position in template.meta_positions():
        arg = head.args[position]
        if not isinstance(arg, Var):
            diagnostics.append(Diagnostic(
                "SR1", "error", clause.location,
                f"meta-argument {position + 1} of {_ind_text(ind)} is not a variable in the clause head", ind,
            ))
            continue
        seen.setdefault(arg, []).append(position)
    for var, positions in seen.items():
        if len(positions) > 1:
            diagnostics.append(Diagnostic(
                "SR1", "warning", clause.location,
                f"variable {var.name} appears in meta-argument positions {_positions_text(positions)} "
                f"of {_ind_text(ind)}", ind,
            ))
    return diagnostics


def check_sr2(clause, template, db, module):
    """Мета-вызовы не от переменных мета-позиций головы компилируются как локальные вызовы."""
    if template is None:
        return []
    ind = template.indicator
    diagnostics = []
    for _, goal, extra in meta_calls(clause.body, db, module):
        if is_qualified(goal):
            continue
        if classify_meta_call(clause, template, goal) is MetaCallClass.CALLER_QUALIFIED:
            continue
        if isinstance(goal, Var):
            diagnostics.append(Diagnostic(
                "SR2", "warning", clause.location,
                f"meta-call of {goal.name} does not resolve in module {module} (possible context leak)", ind,
            ))
            continue
        if not isinstance(goal, (Atom, Compound)):
            continue
        name, arity = indicator(goal)
        target = (name, arity + extra)
        try:
            resolution = db.lookup(module, target)
        except LoadError:
            resolution = None
        if resolution is None or not resolution.resolved:
            diagnostics.append(Diagnostic(
                "SR2", "warning", clause.location,
                f"meta-call of {_ind_text(target)} does not resolve in module {module} (possible context leak)",
                ind,
            ))
        elif resolution.kind != "builtin":
            diagnostics.append(Diagnostic(
                "SR2", "info", clause.location,
                f"meta-call of {_ind_text(target)} compiled as local call in module {module}", ind,
            ))
    return diagnostics


def check_sr3(clause, template, db=None, module=None):
    """Замыкания используются только в call/2-N с числом аргументов по шаблону."""
    head = clause.head
    if template is None or not isinstance(head, Compound):
        return []
    closures = {}
    for position in template.meta_positions():
        spec = template.specs[position]
        arg = head.args[position]
        if isinstance(spec, Closure) and spec.n >= 1 and isinstance(arg, Var):
            closures.setdefault(arg, spec.n)
    if not closures:
        return []
    ind = template.indicator
    diagnostics = []

    def outside(var):
        diagnostics.append(Diagnostic(
            "SR3", "error", clause.location,
            f"closure {var.name} of {_ind_text(ind)} used outside call/2-N", ind,
        ))

    def mismatch(var, how):
        diagnostics.append(Diagnostic(
            "SR3", "error", clause.location,
            f"closure {var.name} of {_ind_text(ind)} expects {closures[var]} extra argument(s) but {how}", ind,
        ))

    def scan(term):
        for var in term_vars(term):
            if var in closures:
                outside(var)

    for goal, lookup in walk_goals(clause.body, db, module):
        if isinstance(goal, Var):
            if goal in closures:
                outside(goal)
            continue
        if not isinstance(goal, Compound) or (goal.functor, len(goal.args)) in CONTROL:
            continue
        if is_qualified(goal):
            scan(goal.args[0])
            if isinstance(goal.args[1], Var):
                scan(goal.args[1])
            continue
        callee = _template_lookup(db, lookup, goal)
        arity = len(goal.args)
        for position, arg in enumerate(goal.args):
            spec = callee.specs[position] if callee is not None else None
            if isinstance(arg, Var) and arg in closures and isinstance(spec, Closure):
                if spec.n == closures[arg]:
                    continue
                if goal.functor == "call":
                    mismatch(arg, f"call/{arity} supplies {arity - 1}")
                else:
                    mismatch(arg, f"meta-argument {position + 1} of {goal.functor}/{arity} declares {spec.n}")
            elif is_meta_spec(spec) and isinstance(arg, (Atom, Compound)):
                continue
            else:
                scan(arg)
    return diagnostics


def check_directives(module_def):
    """D1: прозрачность или tool вместо шаблона; D3: непереносимые режимы; D4: шаблон без клауз."""
    diagnostics = []
    for record in module_def.directives:
        form, directive, location = record.form, record.term, record.location
        if form is DirectiveForm.MODULE_TRANSPARENT:
            for item in items_of(directive.args[0]):
                ind = parse_indicator(item)
                if ind is None:
                    continue
                diagnostics.append(Diagnostic(
                    "D1", "warning", location,
                    f"{_ind_text(ind)} declared transparent: no template, cross-reference and closure "
                    f"checking unavailable", ind,
                ))
        elif form is DirectiveForm.TOOL:
            ind = parse_indicator(directive.args[0])
            if ind is not None:
                diagnostics.append(Diagnostic(
                    "D1", "warning", location,
                    f"{_ind_text(ind)} declared as tool: no template, cross-reference and closure "
                    f"checking unavailable", ind,
                ))
        elif form in (DirectiveForm.META_PREDICATE, DirectiveForm.METAPREDICATE_ISO):
            for raw in items_of(directive.args[0]):
                try:
                    template = normalize_template(form, raw, location)
                except DirectiveError:
                    continue
                ind = template.indicator
                for spec in template.specs:
                    if isinstance(spec, Normal) and not spec.portable:
                        diagnostics.append(Diagnostic(
                            "D3", "warning", location,
                            f"non-portable mode atom {spec.mode} in template of {_ind_text(ind)}", ind,
                        ))
                pred = module_def.predicates.get(ind)
                if pred is None or (not pred.clauses and not pred.dynamic):
                    diagnostics.append(Diagnostic(
                        "D4", "warning", location,
                        f"meta-predicate directive for {_ind_text(ind)} has no matching clauses", ind,
                    ))
    return diagnostics


def check_portability(module_def, db, ceiling=8):
    """P1: call/K выше переносимого предела; P2: call/K от цели, построенной через =../2."""
    diagnostics = []
    for ind, pred in module_def.predicates.items():
        for clause in pred.clauses:
            if clause.generated:
                continue
            univ_built = set()
            for goal, _ in walk_goals(clause.body, db, module_def.name):
                if not isinstance(goal, Compound):
                    continue
                if goal.functor == "=.." and len(goal.args) == 2 and isinstance(goal.args[0], Var):
                    univ_built.add(goal.args[0])
                if goal.functor != "call":
                    continue
                arity = len(goal.args)
                if arity > ceiling:
                    diagnostics.append(Diagnostic(
                        "P1", "warning", clause.location,
                        f"call/{arity} exceeds the portable call/N ceiling of {ceiling}", ind,
                    ))
                if goal.args[0] in univ_built:
                    diagnostics.append(Diagnostic(
                        "P2", "info", clause.location,
                        f"call/{arity} on a goal built with =../2 (poor performance from temporary argument lists)",
                        ind,
                    ))
    return diagnostics


def lint_program(program, portability_call_n=8):
    """Все диагностики загруженной программы, включая диагностики загрузчика, в порядке записи."""
    db = program.db
    diagnostics = list(program.diagnostics)
    for name in db.order:
        module_def = db.modules[name]
        diagnostics.extend(check_directives(module_def))
        diagnostics.extend(check_portability(module_def, db, portability_call_n))
        for pred in module_def.predicates.values():
            if pred.template is None:
                continue
            for clause in pred.clauses:
                if clause.generated:
                    continue
                diagnostics.extend(check_sr1(clause, pred.template))
                diagnostics.extend(check_sr2(clause, pred.template, db, name))
                diagnostics.extend(check_sr3(clause, pred.template, db, name))
    diagnostics = sort_diagnostics(diagnostics)
    logger.info(f"Prolog lint: {len(diagnostics)} diagnostics over {len(db.order)} modules")
    return diagnostics
