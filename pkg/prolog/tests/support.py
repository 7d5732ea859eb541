"""Общие помощники тестов: пути к фикстурам, загрузка программ и запросы."""

import io
import re
from collections import Counter
from pathlib import Path

from ..engine import EngineOptions, run_query
from ..expander import SemanticsFlag
from ..loader import load_program

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
PROGRAMS = FIXTURES / "programs"
LINT = FIXTURES / "lint"

VAR_ID = re.compile(r"(?<![\w])_\d+")


def program(name):
    return str(PROGRAMS / name)


def load_fixtures(*names, texts=(), **kwargs):
    return load_program(sources=[program(n) for n in names], texts=list(texts), **kwargs)


def load_text(text, name="<test>", **kwargs):
    return load_program(texts=[(text, name)], **kwargs)


def options(semantics="calling", max_call_n=255, **kwargs):
    flags = SemanticsFlag(colon_sets_calling_context=semantics == "calling", max_call_n=max_call_n)
    return EngineOptions(semantics=flags, **kwargs)


def solve(db, goal, semantics="calling", **kwargs):
    """(решения как словари текстов, вывод write/1) для запроса."""
    out = io.StringIO()
    solutions, _ = run_query(db, goal, options(semantics, **kwargs), out)
    return [s.as_text() for s in solutions], out.getvalue()


def multiset(solutions):
    return Counter(tuple(sorted(masked_solution(s).items())) for s in solutions)


def masked(text):
    """Заменить номера переменных `_123` шаблоном `_G`."""
    return VAR_ID.sub("_G", text)


def masked_solution(solution):
    return {name: masked(value) for name, value in solution.items()}
