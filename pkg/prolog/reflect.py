"""Рефлексия контекста исполнения: strip_module/3, context_module/1, predicate_property/2."""

from .exceptions import LoadError
from .expander import normalize_qualifiers
from .terms import Atom, Compound, Int, Var, indicator_term


def strip_module(goal, ctx, walk=None):
    """(модуль, чистая цель): квалификатор цели или, при его отсутствии, контекст вызова."""
    qualified = normalize_qualifiers(goal, walk)
    module = qualified.qualifier
    if module is None:
        module = ctx.calling
    return module, qualified.plain


def context_module(ctx):
    return ctx.calling


def _exported(db, module, ind):
    definition = db.module(module)
    return definition is not None and ind in definition.exports


def predicate_properties(db, module, ind):
    """Свойства предиката, видимого из модуля module, в порядке: локальные, импортированные, встроенные."""
    try:
        resolution = db.lookup(module, ind)
    except LoadError:
        return []
    kind = resolution.kind
    if kind == "unresolved":
        return []
    properties = []
    if kind == "builtin":
        builtin = resolution.builtin
        properties.extend([Atom("built_in"), Atom("defined"), Atom("static")])
        if builtin.template is not None:
            properties.append(Compound("meta_predicate", (builtin.template.render(),)))
        return properties
    if kind == "tool":
        properties.append(Atom("defined"))
        properties.append(Compound("tool", (indicator_term(resolution.tool_impl),)))
        if _exported(db, resolution.module, ind):
            properties.append(Atom("exported"))
        if resolution.module != module:
            properties.append(Compound("imported_from", (Atom(resolution.module),)))
        return properties
    pred = resolution.predicate
    if pred.clauses or pred.dynamic:
        properties.append(Atom("defined"))
    properties.append(Atom("dynamic") if pred.dynamic else Atom("static"))
    if pred.template is not None:
        properties.append(Compound("meta_predicate", (pred.template.render(),)))
    if pred.transparent:
        properties.append(Atom("transparent"))
    if _exported(db, resolution.module, ind):
        properties.append(Atom("exported"))
    if kind == "imported":
        properties.append(Compound("imported_from", (Atom(resolution.module),)))
    properties.append(Compound("number_of_clauses", (Int(len(pred.clauses)),)))
    return properties


def visible_heads(db, module, counter):
    """Головы-шаблоны со свежими переменными для всех видимых из модуля предикатов."""
    heads = []
    for name, arity in db.visible_indicators(module):
        if arity == 0:
            heads.append(Atom(name))
        else:
            heads.append(Compound(name, tuple(Var("_", next(counter)) for _ in range(arity))))
    return heads

