"""Загрузка программ: директивы модулей и мета-предикатов, клаузы, финальная проверка и расширение."""

import logging
from dataclasses import dataclass, field
from pathlib import Path

from .exceptions import DirectiveError, LoadError
from .expander import CONTROL_CONSTRUCTS, expand_module
from .lint import Diagnostic
from .moduledb import USER, Clause, DirectiveRecord, ModuleDatabase, normalize_template
from .reader import DirectiveForm, classify_directive, parse_program
from .terms import TRUE, Atom, Compound, Int, Var, format_indicator, indicator, items_of, parse_indicator

logger = logging.getLogger(__name__)


@dataclass
class LoadedProgram:
    db: ModuleDatabase
    files: list = field(default_factory=list)
    items: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)

    @property
    def errors(self):
        return [d for d in self.diagnostics if d.severity == "error"]


def _indicators(term, location):
    found = []
    for item in items_of(term):
        ind = parse_indicator(item)
        if ind is None:
            raise LoadError(f"{location}: expected a predicate indicator Name/Arity, got {item}")
        found.append(ind)
    return found


class ProgramLoader:
    def __init__(self, db=None, strict=False, expand=True, flags=None):
        self.db = db or ModuleDatabase()
        self.strict = strict
        self.expand = expand
        self.flags = flags
        self.program = LoadedProgram(self.db)

    def diagnostic(self, rule, severity, location, message, predicate=None):
        self.program.diagnostics.append(Diagnostic(rule, severity, location, message, predicate))

    def load_file(self, path):
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise LoadError(f"cannot read {path}: {e}") from e
        self.load_text(text, str(path))

    def load_text(self, text, file="<string>"):
        items = parse_program(text, file=file)
        self.program.files.append(file)
        self.program.items[file] = items
        module = USER
        for item in items:
            if item.kind == "directive":
                module = self._directive(item, module)
            else:
                self._clause(item, module)
        logger.info(f"Prolog loader: Loaded {len(items)} items from {file}")

    def finish(self):
        """Проверить экспорт, выполнить расширение и применить --strict."""
        self.db.finalize()
        if self.expand:
            for name in list(self.db.order):
                expand_module(self.db, name, self.flags)
        errors = self.program.errors
        if self.strict and errors:
            first = errors[0]
            raise LoadError(f"{first.location}: {first.message} ({len(errors)} error diagnostic(s) under --strict)")
        return self.program

    # directives

    def _directive(self, item, module):
        directive = item.term.args[0]
        form = classify_directive(directive)
        location = item.location
        if form is not DirectiveForm.MODULE_DECL:
            self.db.ensure_module(module).directives.append(DirectiveRecord(form, directive, location))
        try:
            handler = getattr(self, f"_directive_{form.value}")
            result = handler(directive, form, module, location)
        except LoadError as e:
            if str(e).startswith(str(location)):
                raise
            raise LoadError(f"{location}: {e}") from e
        return result if result is not None else module

    def _directive_module_decl(self, directive, form, module, location):
        name = directive.args[0]
        if not isinstance(name, Atom):
            raise LoadError(f"module name must be an atom, got {name}")
        exports = _indicators(directive.args[1], location) if len(directive.args) == 2 else []
        declared = self.db.declare_module(name.name, exports, location)
        declared.directives.append(DirectiveRecord(form, directive, location))
        self.db.register_import(USER, name.name)
        return name.name

    def _directive_export_decl(self, directive, form, module, location):
        for ind in _indicators(directive.args[0], location):
            self.db.add_export(module, ind)

    def _directive_use_module(self, directive, form, module, location):
        source = directive.args[0]
        if not isinstance(source, Atom):
            raise LoadError(f"use_module/{len(directive.args)} expects a module name, got {source}")
        preds = _indicators(directive.args[1], location) if len(directive.args) == 2 else None
        self.db.register_import(module, source.name, preds)

    def _templates(self, directive, form, module, location):
        for raw in items_of(directive.args[0]):
            try:
                template = normalize_template(form, raw, location)
            except DirectiveError as e:
                self.diagnostic(
                    "D2", "error", location, f"malformed meta-predicate template: {e.message}",
                    indicator(raw) if isinstance(raw, (Atom, Compound)) else None,
                )
                continue
            self.db.set_template(module, template, location)

    _directive_meta_predicate = _templates
    _directive_metapredicate_iso = _templates

    def _directive_module_transparent(self, directive, form, module, location):
        for ind in _indicators(directive.args[0], location):
            self.db.mark_transparent(module, ind)

    def _directive_tool(self, directive, form, module, location):
        interface = parse_indicator(directive.args[0])
        impl = parse_indicator(directive.args[1])
        if interface is None or impl is None:
            raise LoadError("tool/2 expects two predicate indicators")
        self.db.add_tool(module, interface, impl)

    def _directive_dynamic(self, directive, form, module, location):
        for ind in _indicators(directive.args[0], location):
            self.db.mark_dynamic(module, ind)

    def _directive_mode(self, directive, form, module, location):
        logger.debug(f"Prolog loader: Ignoring mode/2 directive at {location}")

    def _directive_op(self, directive, form, module, location):
        self.diagnostic("D5", "error", location, "op/3 directives are not supported")

    def _directive_unknown(self, directive, form, module, location):
        if isinstance(directive, (Atom, Compound)):
            name = format_indicator(indicator(directive))
        else:
            name = str(directive)
        self.diagnostic("D5", "warning", location, f"unknown directive {name} ignored")

    # clauses

    def _clause(self, item, module):
        term = item.term
        head, body = term, TRUE
        if isinstance(term, Compound) and term.functor == ":-" and len(term.args) == 2:
            head, body = term.args
        while isinstance(head, Compound) and head.functor == ":" and len(head.args) == 2:
            if not isinstance(head.args[0], Atom):
                raise LoadError(f"{item.location}: clause head qualifier must be an atom")
            module, head = head.args[0].name, head.args[1]
        if isinstance(head, (Var, Int)):
            raise LoadError(f"{item.location}: clause head must be callable, got {head}")
        if isinstance(body, Int):
            raise LoadError(f"{item.location}: clause body must be callable, got {body}")
        ind = indicator(head)
        if ind in CONTROL_CONSTRUCTS or ind in (("!", 0), (":", 2)) or ind[0] == "call":
            raise LoadError(f"{item.location}: cannot redefine control construct {format_indicator(ind)}")
        try:
            self.db.add_clause(module, Clause(head, body, item.location), ind)
        except LoadError as e:
            raise LoadError(f"{item.location}: {e}") from e
        logger.debug(f"Prolog loader: Added clause for {module}:{format_indicator(ind)}")


def load_program(sources=(), texts=(), strict=False, expand=True, flags=None):
    """Загрузить файлы sources и пары (text, name) из texts в порядке следования."""
    loader = ProgramLoader(strict=strict, expand=expand, flags=flags)
    for path in sources:
        loader.load_file(path)
    for text, name in texts:
        loader.load_text(text, name)
    return loader.finish()
