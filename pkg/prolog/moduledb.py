"""База модулей: таблицы предикатов, экспорт/импорт, шаблоны мета-предикатов, связи tool/2."""

import logging
from dataclasses import dataclass, field
from typing import Optional

from .exceptions import DirectiveError, LoadError
from .reader import DirectiveForm
from .terms import Atom, Compound, Int, format_indicator

logger = logging.getLogger(__name__)

USER = "user"
BASIC_MODES = ("+", "?", "@", "-", "*")
EXTENDED_MODES = ("++", "--", "+-", "!", "^", "//")


@dataclass(frozen=True)
class Closure:
    n: int

    def render(self):
        return Int(self.n)


@dataclass(frozen=True)
class ContextAware:
    def render(self):
        return Atom(":")


@dataclass(frozen=True)
class Normal:
    mode: str

    @property
    def portable(self):
        return self.mode in BASIC_MODES

    def render(self):
        return Atom(self.mode)


def is_meta_spec(spec):
    return isinstance(spec, (Closure, ContextAware))


@dataclass(frozen=True)
class MetaTemplate:
    name: str
    arity: int
    specs: tuple

    def __post_init__(self):
        if len(self.specs) != self.arity:
            raise ValueError(f"Template {self.name}/{self.arity} has {len(self.specs)} specs")

    @property
    def indicator(self):
        return (self.name, self.arity)

    def meta_positions(self):
        return [i for i, spec in enumerate(self.specs) if is_meta_spec(spec)]

    def render(self):
        """Шаблон в синтаксисе директивы meta_predicate/1."""
        if not self.specs:
            return Atom(self.name)
        return Compound(self.name, tuple(spec.render() for spec in self.specs))


def normalize_template(form, raw, location=None):
    """Привести шаблон любого диалекта к словарю MetaArgSpec."""
    if isinstance(raw, Atom):
        return MetaTemplate(raw.name, 0, ())
    if not isinstance(raw, Compound):
        raise DirectiveError(f"template must be callable, got {raw}", location)
    specs = []
    for position, arg in enumerate(raw.args, start=1):
        if isinstance(arg, Int):
            if arg.value < 0:
                raise DirectiveError(
                    f"negative closure arity {arg.value} at argument {position} of {raw.functor}/{len(raw.args)}",
                    location,
                )
            specs.append(Closure(arg.value))
        elif isinstance(arg, Atom):
            name = arg.name
            if name == ":":
                specs.append(Closure(0) if form is DirectiveForm.METAPREDICATE_ISO else ContextAware())
            elif name == "::":
                specs.append(Closure(0))
            elif name in BASIC_MODES or name in EXTENDED_MODES:
                specs.append(Normal(name))
            else:
                raise DirectiveError(
                    f"unknown argument specifier {name} at argument {position} of {raw.functor}/{len(raw.args)}",
                    location,
                )
        else:
            raise DirectiveError(
                f"non-atomic argument specifier at argument {position} of {raw.functor}/{len(raw.args)}",
                location,
            )
    return MetaTemplate(raw.functor, len(specs), tuple(specs))


@dataclass
class Clause:
    head: object
    body: object
    location: Optional[object] = None
    generated: bool = False


@dataclass
class PredicateDef:
    indicator: tuple
    clauses: list = field(default_factory=list)
    template: Optional[MetaTemplate] = None
    transparent: bool = False
    dynamic: bool = False
    template_location: Optional[object] = None

    def copy(self):
        return PredicateDef(
            self.indicator,
            list(self.clauses),
            self.template,
            self.transparent,
            self.dynamic,
            self.template_location,
        )


@dataclass
class DirectiveRecord:
    form: DirectiveForm
    term: object
    location: Optional[object]


@dataclass
class ModuleDef:
    name: str
    exports: set = field(default_factory=set)
    imports: dict = field(default_factory=dict)
    import_all: list = field(default_factory=list)
    predicates: dict = field(default_factory=dict)
    tools: dict = field(default_factory=dict)
    directives: list = field(default_factory=list)
    location: Optional[object] = None

    def copy(self):
        return ModuleDef(
            self.name,
            set(self.exports),
            dict(self.imports),
            list(self.import_all),
            {ind: pred.copy() for ind, pred in self.predicates.items()},
            dict(self.tools),
            list(self.directives),
            self.location,
        )


@dataclass(frozen=True)
class Resolution:
    kind: str  # local | imported | tool | builtin | unresolved
    module: Optional[str] = None
    predicate: Optional[PredicateDef] = None
    builtin: Optional[object] = None
    tool_impl: Optional[tuple] = None

    @property
    def resolved(self):
        return self.kind != "unresolved"

    @property
    def template(self):
        if self.predicate is not None:
            return self.predicate.template
        if self.builtin is not None:
            return self.builtin.template
        return None


UNRESOLVED = Resolution("unresolved")


class ModuleDatabase:
    """Граф модулей; модуль user существует всегда."""

    def __init__(self, builtins=None):
        if builtins is None:
            from .builtins import BUILTINS

            builtins = BUILTINS
        self.builtins = builtins
        self.modules = {USER: ModuleDef(USER)}
        self.order = [USER]

    def copy(self):
        clone = ModuleDatabase(self.builtins)
        clone.modules = {name: module.copy() for name, module in self.modules.items()}
        clone.order = list(self.order)
        return clone

    def module(self, name) -> Optional[ModuleDef]:
        return self.modules.get(name)

    def ensure_module(self, name):
        """Создать модуль по требованию (assertz в новый модуль)."""
        if name not in self.modules:
            self.modules[name] = ModuleDef(name)
            self.order.append(name)
            logger.debug(f"Prolog moduledb: Created module '{name}' on demand")
        return self.modules[name]

    def declare_module(self, name, exports=(), location=None):
        if name in self.modules:
            raise LoadError(f"module {name} is already declared")
        module = ModuleDef(name, set(exports), location=location)
        self.modules[name] = module
        self.order.append(name)
        logger.info(f"Prolog moduledb: Declared module '{name}' exporting {len(module.exports)} predicates")
        return module

    def add_export(self, module_name, ind):
        self.modules[module_name].exports.add(ind)

    def register_import(self, into, source, preds=None):
        """Импорт из source: preds=None означает все экспортируемые предикаты."""
        target = self.ensure_module(into)
        loaded = self.modules.get(source)
        if preds is None:
            if source not in target.import_all:
                target.import_all.append(source)
            return
        for ind in preds:
            if ind in target.predicates and target.predicates[ind].clauses:
                raise LoadError(
                    f"import of {format_indicator(ind)} from {source} into {into} "
                    f"clashes with a local definition"
                )
            if loaded is not None and not self._provides(loaded, ind):
                raise LoadError(f"module {source} does not export {format_indicator(ind)}")
            target.imports[ind] = source
        if loaded is None:
            logger.info(f"Prolog moduledb: Provisional import into '{into}' from unloaded module '{source}'")

    @staticmethod
    def _provides(module, ind):
        return ind in module.exports

    def predicate(self, module_name, ind, create=True) -> Optional[PredicateDef]:
        module = self.ensure_module(module_name) if create else self.modules.get(module_name)
        if module is None:
            return None
        pred = module.predicates.get(ind)
        if pred is None and create:
            pred = PredicateDef(ind)
            module.predicates[ind] = pred
        return pred

    def add_clause(self, module_name, clause, ind):
        module = self.ensure_module(module_name)
        if ind in module.imports:
            raise LoadError(
                f"clause for {format_indicator(ind)} in {module_name} clashes with its import "
                f"from {module.imports[ind]}"
            )
        self.predicate(module_name, ind).clauses.append(clause)

    def set_template(self, module_name, template, location=None):
        pred = self.predicate(module_name, template.indicator)
        if pred.transparent:
            raise LoadError(f"{format_indicator(template.indicator)} is already declared transparent")
        pred.template = template
        pred.template_location = location

    def mark_transparent(self, module_name, ind):
        pred = self.predicate(module_name, ind)
        if pred.template is not None:
            raise LoadError(f"{format_indicator(ind)} already has a meta-predicate template")
        pred.transparent = True

    def mark_dynamic(self, module_name, ind):
        self.predicate(module_name, ind).dynamic = True

    def add_tool(self, module_name, interface, impl):
        if impl[1] != interface[1] + 1:
            raise LoadError(
                f"tool link {format_indicator(interface)} -> {format_indicator(impl)}: "
                f"implementation arity must be interface arity + 1"
            )
        self.ensure_module(module_name).tools[interface] = impl

    def lookup(self, start, ind) -> Resolution:
        """Разрешить индикатор, начиная с модуля start: локально, по импорту, среди встроенных."""
        resolution = self._lookup_module(start, ind, [])
        if resolution is not None:
            return resolution
        builtin = self.builtins.get(ind)
        if builtin is not None:
            return Resolution("builtin", builtin=builtin)
        return UNRESOLVED

    def _lookup_module(self, name, ind, chain):
        if (name, ind) in chain:
            cycle = " -> ".join(m for m, _ in chain + [(name, ind)])
            raise LoadError(f"import cycle for {format_indicator(ind)}: {cycle}")
        module = self.modules.get(name)
        if module is None:
            return None
        if ind in module.tools:
            return Resolution("tool", module=name, tool_impl=module.tools[ind])
        pred = module.predicates.get(ind)
        if pred is not None:
            return Resolution("local", module=name, predicate=pred)
        chain = chain + [(name, ind)]
        if ind in module.imports:
            return self._follow(module.imports[ind], ind, chain)
        for source in module.import_all:
            provider = self.modules.get(source)
            if provider is not None and ind in provider.exports:
                return self._follow(source, ind, chain)
        return None

    def _follow(self, source, ind, chain):
        provider = self.modules.get(source)
        if provider is None or ind not in provider.exports:
            return UNRESOLVED
        found = self._lookup_module(source, ind, chain)
        if found is None or not found.resolved:
            return UNRESOLVED
        if found.kind == "local":
            return Resolution("imported", module=found.module, predicate=found.predicate)
        return found

    def visible_indicators(self, name):
        """Видимые из модуля индикаторы: локальные, затем импортированные."""
        module = self.modules.get(name)
        if module is None:
            return []
        seen = list(module.predicates) + [ind for ind in module.tools if ind not in module.predicates]
        for ind in module.imports:
            if ind not in seen:
                seen.append(ind)
        for source in module.import_all:
            provider = self.modules.get(source)
            if provider is None:
                continue
            for ind in sorted(provider.exports):
                if ind not in seen:
                    seen.append(ind)
        return seen

    def finalize(self):
        """Проверить, что каждый экспорт определён, импортирован или связан tool/2, и что в импорте нет циклов."""
        for name in self.order:
            module = self.modules[name]
            for ind in sorted(module.exports):
                if ind in module.predicates or ind in module.imports or ind in module.tools:
                    continue
                if any(ind in self.modules[s].exports for s in module.import_all if s in self.modules):
                    continue
                raise LoadError(f"module {name} exports {format_indicator(ind)} but does not define it")
        for name in self.order:
            module = self.modules[name]
            for ind in [*module.imports, *sorted(module.exports)]:
                self._lookup_module(name, ind, [])
        logger.info(f"Prolog moduledb: Finalized {len(self.modules)} modules")
