"""Специализация вызовов мета-предикатов со статически известными мета-аргументами.

Вызов `my_call(me(X))` заменяется вызовом вспомогательного предиката `my_call__spec1(X)` в модуле
вызывающего; его клаузы являются копиями клауз мета-предиката, в которых параметры-замыкания подставлены,
а каждая цель явно квалифицирована модулем, где её искал бы исходный вызов. Так тело перестаёт
зависеть от контекста исполнения, и мета-вызовы исчезают.
"""

import io
import itertools
import logging
import statistics
import time
from dataclasses import dataclass, field

from .engine import Engine
from .exceptions import LoadError, PrologError, UsageError
from .expander import SemanticsFlag, is_control, normalize_qualifiers, propagate_control, propagates, single_qualified
from .lint import Diagnostic
from .loader import load_program
from .moduledb import Clause, ContextAware, is_meta_spec
from .terms import (
    Atom,
    Compound,
    Var,
    add_args,
    format_indicator,
    indicator,
    is_qualified,
    make,
    make_list,
    qualify,
    rename,
    substitute,
    term_vars,
    variant_key,
)

logger = logging.getLogger(__name__)

SPEC_INFIX = "__spec"
CONTEXT_BUILTINS = {("context_module", 1), ("strip_module", 3)}
VARIANTS = ("runtime", "expanded", "specialized", "univ")

UNIV_SOURCE = """
:- meta_predicate('$univ_call'(:, +)).
'$univ_call'(Closure, Extra) :-
    strip_module(Closure, M, G),
    G =.. L0,
    '$univ_append'(L0, Extra, L1),
    G2 =.. L1,
    call(M:G2).
'$univ_append'([], L, L).
'$univ_append'([H|T], L, [H|R]) :- '$univ_append'(T, L, R).
"""


class Unspecializable(Exception):
    """Вызов нельзя специализировать без изменения семантики."""


@dataclass
class SpecializationReport:
    rewritten: int = 0
    auxiliaries: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)


def _contains_cut(term):
    stack = [term]
    while stack:
        current = stack.pop()
        if current == Atom("!"):
            return True
        if isinstance(current, Compound):
            stack.extend(current.args)
    return False


def _max_var_id(db):
    highest = -1
    for module in db.modules.values():
        for pred in module.predicates.values():
            for clause in pred.clauses:
                for var in term_vars(Compound(":-", (clause.head, clause.body))):
                    highest = max(highest, var.id)
    return highest


class Specializer:
    def __init__(self, db, flags=None, max_depth=8):
        self.db = db
        self.flags = flags or SemanticsFlag()
        self.max_depth = max_depth
        self.counter = itertools.count(_max_var_id(db) + 1)
        self.memo = {}
        self.next_index = {}
        self.pending = []
        self.report = SpecializationReport()

    @property
    def calling_semantics(self):
        return self.flags.colon_sets_calling_context

    # call sites

    def site(self, module, goal, location=None):
        """(новый вызов, клаузы) для цели тела клаузы модуля module; (goal, []) если вызов не специализируется."""
        target = self._site_target(module, goal, location)
        if target is None:
            return goal, []
        resolution, plain, statics = target
        memo, indices, mark = dict(self.memo), dict(self.next_index), len(self.pending)
        try:
            call = self._auxiliary(module, resolution, plain, statics, 0, location)
        except Unspecializable as e:
            self.memo, self.next_index = memo, indices
            del self.pending[mark:]
            logger.warning(
                f"Prolog specializer: Left call to {format_indicator(indicator(plain))} "
                f"in module '{module}' unspecialized: {e}"
            )
            return goal, []
        clauses = [clause for _, clause in self.pending[mark:]]
        return call, clauses

    def _site_target(self, module, goal, location):
        if isinstance(goal, Var) or not isinstance(goal, (Atom, Compound)):
            return None
        lookup, calling, plain = module, module, goal
        if is_qualified(goal):
            try:
                qualified = normalize_qualifiers(goal)
            except PrologError:
                return None
            if not isinstance(qualified.qualifier, str) or not isinstance(qualified.plain, (Atom, Compound)):
                return None
            plain, lookup = qualified.plain, qualified.qualifier
            calling = lookup if self.calling_semantics else module
        if is_control(plain) or propagates(plain):
            return None
        ind = indicator(plain)
        try:
            resolution = self.db.lookup(lookup, ind)
        except LoadError:
            return None
        if resolution.kind == "tool" or (resolution.predicate is not None and resolution.predicate.transparent):
            self.report.diagnostics.append(Diagnostic(
                "S1", "info", location,
                f"{format_indicator(ind)} has no template (transparent or tool): call site not specializable", ind,
            ))
            return None
        pred = resolution.predicate
        if pred is None or pred.template is None or pred.dynamic or not pred.clauses:
            return None
        statics = self._statics(plain, pred.template, calling)
        if statics is None:
            return None
        return resolution, plain, statics

    @staticmethod
    def _statics(goal, template, calling):
        """(контекст, цель) для каждой мета-позиции или None, если аргумент неизвестен при загрузке."""
        if not template.meta_positions():
            return None
        statics = []
        for position in template.meta_positions():
            try:
                qualified = normalize_qualifiers(goal.args[position])
            except PrologError:
                return None
            qualifier = calling if qualified.qualifier is None else qualified.qualifier
            plain = qualified.plain
            if not isinstance(qualifier, str) or not isinstance(plain, (Atom, Compound)) or _contains_cut(plain):
                return None
            statics.append((qualifier, plain))
        return statics

    # auxiliary predicates

    def _fresh_name(self, module, name):
        definition = self.db.ensure_module(module)
        index = self.next_index.get((module, name), 1)
        while True:
            candidate = f"{name}{SPEC_INFIX}{index}"
            index += 1
            clashing = [
                pred for (pname, _), pred in definition.predicates.items()
                if pname == candidate and any(not c.generated for c in pred.clauses)
            ]
            if clashing:
                raise LoadError(f"auxiliary predicate {candidate} clashes with a predicate defined in {module}")
            taken = any(pname == candidate for pname, _ in definition.predicates) or any(
                indicator(clause.head)[0] == candidate for owner, clause in self.pending if owner == module
            )
            if not taken:
                self.next_index[(module, name)] = index
                return candidate

    def _auxiliary(self, module, resolution, goal, statics, depth, location):
        pred = resolution.predicate
        template = pred.template
        positions = template.meta_positions()
        static_terms = [qualify(qualifier, plain) for qualifier, plain in statics]
        shared = term_vars(make("$", *static_terms)) if static_terms else []
        rest = [arg for i, arg in enumerate(goal.args) if i not in positions]
        key = (module, resolution.module, template.indicator, variant_key(make("$", *static_terms)))
        name = self.memo.get(key)
        if name is None:
            name = self._fresh_name(module, template.name)
            self.memo[key] = name
            for clause in pred.clauses:
                built = self._aux_clause(module, resolution.module, name, clause, positions, static_terms, shared, depth)
                self.pending.append((module, built))
            logger.debug(f"Prolog specializer: Generated {name} in module '{module}'")
        return make(name, *rest, *shared)

    def _aux_clause(self, module, definition, name, clause, positions, static_terms, shared, depth):
        mapping = {}
        head = rename(clause.head, self.counter, mapping)
        body = rename(clause.body, self.counter, mapping)
        meta_vars = [head.args[p] for p in positions]
        if not all(isinstance(v, Var) for v in meta_vars):
            raise Unspecializable(f"non-variable meta-argument in a head of {format_indicator(indicator(clause.head))}")
        if len(set(meta_vars)) != len(meta_vars):
            raise Unspecializable(f"meta-argument variable repeated in a head of {name}")
        replacement = dict(zip(meta_vars, static_terms))
        head = substitute(head, replacement)
        body = substitute(body, replacement)
        rest = [arg for i, arg in enumerate(head.args) if i not in positions]
        aux_head = make(name, *rest, *shared)
        aux_body = self._localize(body, definition, definition, module, depth, clause.location)
        return Clause(aux_head, aux_body, clause.location, generated=True)

    # body localization

    def _require_calling(self, calling, module, what):
        if calling != module:
            raise Unspecializable(f"{what} would run in calling context {module} instead of {calling}")

    def _localize(self, goal, lookup, calling, module, depth, location):
        """Цель, исполняемая в модуле module так же, как goal с контекстами (lookup, calling)."""
        if isinstance(goal, Var):
            self._require_calling(calling, module, f"goal {goal.name} unknown at load time")
            return goal
        if not isinstance(goal, (Atom, Compound)):
            return goal
        if goal == Atom("!"):
            return goal
        if is_qualified(goal):
            try:
                qualified = normalize_qualifiers(goal)
            except PrologError:
                raise Unspecializable(f"malformed qualifier in {goal}") from None
            qualifier, plain = qualified.qualifier, qualified.plain
            if not isinstance(qualifier, str):
                raise Unspecializable("module qualifier unknown at load time")
            if isinstance(plain, Var):
                self._require_calling(calling, module, f"goal {plain.name} unknown at load time")
                return goal
            inner_calling = qualifier if self.calling_semantics else calling
            if propagates(plain):
                return self._localize(propagate_control(inner_calling, plain), lookup, calling, module, depth, location)
            return self._localize_plain(plain, qualifier, inner_calling, module, depth, location)
        if is_control(goal):
            return Compound(
                goal.functor,
                tuple(self._localize(arg, lookup, calling, module, depth, location) for arg in goal.args),
            )
        return self._localize_plain(goal, lookup, calling, module, depth, location)

    def _localize_plain(self, goal, lookup, calling, module, depth, location):
        ind = indicator(goal)
        if ind[0] == "call" and ind[1] >= 1:
            return self._localize_call(goal, lookup, calling, module, depth, location)
        try:
            resolution = self.db.lookup(lookup, ind)
        except LoadError as e:
            raise Unspecializable(str(e)) from None
        if resolution.kind == "builtin":
            return self._localize_builtin(goal, resolution, lookup, calling, module, depth, location)
        if resolution.kind == "tool":
            raise Unspecializable(f"calls tool predicate {format_indicator(ind)}")
        pred = resolution.predicate
        if pred is not None and pred.transparent:
            raise Unspecializable(f"calls transparent predicate {format_indicator(ind)}")
        if pred is None or pred.template is None:
            return goal if lookup == module else qualify(lookup, goal)
        qualified = Compound(goal.functor, tuple(
            single_qualified(arg, calling) if is_meta_spec(spec) else arg
            for arg, spec in zip(goal.args, pred.template.specs)
        ))
        statics = None
        if not pred.dynamic and pred.clauses:
            statics = self._statics(qualified, pred.template, calling)
        if statics is None:
            return qualified if lookup == module else qualify(lookup, qualified)
        if depth + 1 > self.max_depth:
            self.report.diagnostics.append(Diagnostic(
                "S1", "info", location,
                f"specialization of {format_indicator(ind)} stopped at depth {self.max_depth}", ind,
            ))
            return qualified if lookup == module else qualify(lookup, qualified)
        return self._auxiliary(module, resolution, qualified, statics, depth + 1, location)

    def _localize_call(self, goal, lookup, calling, module, depth, location):
        closure, extra = goal.args[0], goal.args[1:]
        try:
            qualified = normalize_qualifiers(closure)
        except PrologError:
            raise Unspecializable(f"malformed qualifier in {closure}") from None
        plain = qualified.plain
        if isinstance(plain, Var) or not isinstance(qualified.qualifier, (str, type(None))):
            self._require_calling(calling, module, "closure unknown at load time")
            return goal
        if not isinstance(plain, (Atom, Compound)):
            return goal
        qualifier = calling if qualified.qualifier is None else qualified.qualifier
        inlined = self._localize(qualify(qualifier, add_args(plain, extra)), lookup, calling, module, depth, location)
        if _contains_cut(plain):
            return Compound("call", (inlined,))
        return inlined

    def _localize_builtin(self, goal, resolution, lookup, calling, module, depth, location):
        builtin = resolution.builtin
        ind = indicator(goal)
        same = self.db.lookup(module, ind).kind == "builtin"
        if ind in CONTEXT_BUILTINS:
            self._require_calling(calling, module, f"{format_indicator(ind)}")
            if not same:
                raise Unspecializable(f"{format_indicator(ind)} is redefined in {module}")
            return goal
        if builtin.template is not None and isinstance(goal, Compound):
            args = []
            for arg, spec in zip(goal.args, builtin.template.specs):
                if isinstance(spec, ContextAware):
                    args.append(single_qualified(arg, calling))
                elif is_meta_spec(spec):
                    args.append(self._localize(single_qualified(arg, calling), lookup, calling, module, depth, location))
                else:
                    args.append(arg)
            goal = Compound(goal.functor, tuple(args))
        return goal if same else qualify(lookup, goal)

    # programs

    def commit(self):
        for module, clause in self.pending:
            ind = indicator(clause.head)
            pred = self.db.predicate(module, ind)
            pred.clauses.append(clause)
            label = f"{module}:{format_indicator(ind)}"
            if label not in self.report.auxiliaries:
                self.report.auxiliaries.append(label)
        self.pending = []

    def rewrite_body(self, body, module, location):
        if isinstance(body, Compound) and is_control(body):
            return Compound(body.functor, tuple(self.rewrite_body(arg, module, location) for arg in body.args))
        rewritten, clauses = self.site(module, body, location)
        if clauses or rewritten is not body:
            self.report.rewritten += 1
            self.commit()
        return rewritten

    def run(self):
        for name in list(self.db.order):
            definition = self.db.modules[name]
            for pred in list(definition.predicates.values()):
                if pred.transparent:
                    continue
                for index, clause in enumerate(list(pred.clauses)):
                    if clause.generated:
                        continue
                    body = self.rewrite_body(clause.body, name, clause.location)
                    if body is not clause.body:
                        pred.clauses[index] = Clause(clause.head, body, clause.location, clause.generated)
        logger.info(
            f"Prolog specializer: Rewrote {self.report.rewritten} call sites, "
            f"generated {len(self.report.auxiliaries)} auxiliary predicates"
        )
        return self.report


def specialize_call_site(db, module, goal, flags=None, max_depth=8):
    """Специализировать один вызов; база не меняется, клаузы вспомогательных предикатов возвращаются."""
    specializer = Specializer(db, flags, max_depth)
    return specializer.site(module, goal)


def specialize_program(db, flags=None, max_depth=8):
    """Специализировать все вызовы в клаузах базы на месте."""
    return Specializer(db, flags, max_depth).run()


def meta_call_counter(db, text, options=None):
    """(решения, число мета-вызовов) для запроса text."""
    engine = Engine(db, options, output=io.StringIO())
    solutions = list(engine.query(text))
    return solutions, engine.meta_calls


# bench


@dataclass
class BenchReport:
    query: str
    repetitions: int
    semantics: str
    timings: dict = field(default_factory=dict)
    solutions: dict = field(default_factory=dict)

    def table(self):
        if not self.timings:
            return ""
        rows = [f"{'variant':<12} {'median_ms':>12} {'solutions':>10}"]
        for variant, seconds in self.timings.items():
            rows.append(f"{variant:<12} {seconds * 1000:>12.3f} {self.solutions[variant]:>10}")
        return "\n".join(rows) + "\n"


def _univ_rewrite(body, module):
    if isinstance(body, Compound) and is_control(body):
        return Compound(body.functor, tuple(_univ_rewrite(arg, module) for arg in body.args))
    if isinstance(body, Compound) and body.functor == "call" and len(body.args) >= 2:
        closure = single_qualified(body.args[0], module)
        return qualify("user", Compound("$univ_call", (closure, make_list(body.args[1:]))))
    return body


def _univ_program(db):
    for name in db.order:
        if name == "user":
            helpers = {("$univ_call", 2), ("$univ_append", 3)}
        else:
            helpers = set()
        for ind, pred in db.modules[name].predicates.items():
            if ind in helpers:
                continue
            pred.clauses = [
                Clause(c.head, _univ_rewrite(c.body, name), c.location, c.generated) for c in pred.clauses
            ]
    return db


def prepare_variant(variant, texts, flags=None, max_depth=8):
    """База данных для варианта bench: без расширения, с расширением, специализированная, через =../2."""
    if variant not in VARIANTS:
        raise UsageError(f"unknown bench variant '{variant}' (expected one of: {', '.join(VARIANTS)})")
    texts = list(texts)
    if variant == "runtime":
        return load_program(texts=texts, expand=False, flags=flags).db
    if variant == "univ":
        program = load_program(texts=texts + [(UNIV_SOURCE, "<univ>")], flags=flags)
        return _univ_program(program.db)
    db = load_program(texts=texts, flags=flags).db
    if variant == "specialized":
        specialize_program(db, flags, max_depth)
    return db


def bench(texts, query, repetitions, variants=None, options=None, max_depth=8):
    """Медианное время выполнения запроса для каждого варианта программы."""
    variants = list(variants or VARIANTS)
    for variant in variants:
        if variant not in VARIANTS:
            raise UsageError(f"unknown bench variant '{variant}' (expected one of: {', '.join(VARIANTS)})")
    flags = options.semantics if options is not None else SemanticsFlag()
    report = BenchReport(query, repetitions, flags.name)
    if repetitions <= 0:
        return report
    for variant in variants:
        db = prepare_variant(variant, texts, flags, max_depth)
        engine = Engine(db, options, output=io.StringIO())
        samples = []
        count = 0
        for _ in range(repetitions):
            started = time.perf_counter()
            count = sum(1 for _ in engine.query(query))
            samples.append(time.perf_counter() - started)
        report.timings[variant] = statistics.median(samples)
        report.solutions[variant] = count
        logger.info(f"Prolog bench: {variant} median {report.timings[variant] * 1000:.3f} ms over {repetitions} runs")
    return report
