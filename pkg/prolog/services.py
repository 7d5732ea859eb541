import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from django.conf import settings
from django.db import transaction

from .engine import Engine
from .exceptions import LoadError, PrologError, PrologSyntaxError, UsageError
from .expander import SemanticsFlag
from .lint import lint_program
from .loader import load_program
from .reader import read_term
from .specializer import bench, specialize_program
from .writer import program_text, term_to_text

logger = logging.getLogger(__name__)


@dataclass
class QueryOutcome:
    """Итог запроса: решения, брошенный терм (если был) и счётчики движка."""

    solutions: list = field(default_factory=list)
    error: Optional[object] = None
    output: str = ""
    meta_calls: int = 0
    scope_warnings: list = field(default_factory=list)

    @property
    def succeeded(self):
        return bool(self.solutions) and self.error is None

    @property
    def error_text(self):
        return term_to_text(self.error, quoted=True) if self.error is not None else None


class PrologService:
    """Сервис для загрузки, выполнения и анализа программ."""

    _last_error = None

    @classmethod
    def get_last_error(cls):
        """Получить последнюю ошибку."""
        return cls._last_error

    @classmethod
    def clear_error(cls):
        """Очистить последнюю ошибку."""
        cls._last_error = None

    @classmethod
    def read_sources(cls, paths):
        """Прочитать файлы программы в пары (текст, имя)."""
        texts = []
        for path in paths:
            try:
                texts.append((Path(path).read_text(encoding="utf-8"), str(path)))
            except (OSError, UnicodeDecodeError) as e:
                raise LoadError(f"cannot read {path}: {e}") from e
        return texts

    @classmethod
    def load(cls, sources=(), texts=(), strict=False, expand=True, flags=None):
        """Загрузить программу; None при ошибке загрузки."""
        cls._last_error = None
        try:
            logger.info(f"Prolog loader: Loading {len(sources) + len(texts)} sources (expand={expand})")
            program = load_program(sources=sources, texts=texts, strict=strict, expand=expand, flags=flags)
            logger.info(f"Prolog loader: Loaded modules {', '.join(program.db.order)}")
            return program
        except PrologSyntaxError as e:
            logger.error(f"Prolog loader: Syntax error: {e}")
            cls._last_error = str(e)
            return None
        except LoadError as e:
            logger.error(f"Prolog loader: Load error: {e}")
            cls._last_error = str(e)
            return None

    @classmethod
    def run(cls, program, goal, options=None, output=None, on_solution=None, first_only=False):
        """Выполнить запрос; on_solution вызывается на каждое решение до поиска следующего.

        Возвращает None, если запрос не разбирается.
        """
        cls._last_error = None
        try:
            term = read_term(goal, file="<query>")
        except PrologSyntaxError as e:
            logger.error(f"Prolog engine: Cannot parse goal '{goal}': {e}")
            cls._last_error = str(e)
            return None

        sink = output if output is not None else io.StringIO()
        engine = Engine(program.db, options, sink)
        outcome = QueryOutcome()
        logger.info(f"Prolog engine: Solving '{goal}' under semantics={engine.flags.name}")
        try:
            for solution in engine.solve(term):
                outcome.solutions.append(solution)
                if on_solution is not None:
                    on_solution(solution)
                if first_only:
                    break
        except PrologError as e:
            outcome.error = e.ball
            logger.info(f"Prolog engine: Uncaught error {term_to_text(e.ball)} in '{goal}'")
        outcome.meta_calls = engine.meta_calls
        outcome.scope_warnings = list(engine.scope_warnings)
        if output is None:
            outcome.output = sink.getvalue()
        logger.info(
            f"Prolog engine: {len(outcome.solutions)} solutions for '{goal}', {outcome.meta_calls} meta-calls"
        )
        return outcome

    @classmethod
    def lint(cls, sources=(), texts=(), portability_call_n=None, flags=None):
        """Диагностики программы; программа загружается без расширения. None при ошибке загрузки."""
        program = cls.load(sources, texts, expand=False, flags=flags)
        if program is None:
            return None
        ceiling = portability_call_n or settings.PROLOG["PORTABILITY_CALL_N"]
        diagnostics = lint_program(program, ceiling)
        logger.info(f"Prolog lint: {len(diagnostics)} diagnostics")
        return diagnostics

    @classmethod
    def expand(cls, sources=(), texts=(), flags=None):
        """Текст программы после расширения при загрузке."""
        program = cls.load(sources, texts, flags=flags)
        if program is None:
            return None
        return program_text(program.db)

    @classmethod
    def specialize(cls, program, flags=None, max_depth=None):
        """Специализировать вызовы мета-предикатов в загруженной программе на месте."""
        cls._last_error = None
        depth = max_depth or settings.PROLOG["SPECIALIZE_MAX_DEPTH"]
        try:
            report = specialize_program(program.db, flags or SemanticsFlag(), depth)
        except LoadError as e:
            logger.error(f"Prolog specializer: {e}")
            cls._last_error = str(e)
            return None
        logger.info(f"Prolog specializer: {report.rewritten} call sites rewritten")
        return report

    @classmethod
    def bench(cls, texts, goal, repetitions, variants=None, options=None):
        """Таблица медианных времён; None при ошибке загрузки или исполнения."""
        cls._last_error = None
        try:
            logger.info(f"Prolog bench: '{goal}' x{repetitions}, variants {variants or 'all'}")
            return bench(texts, goal, repetitions, variants, options, settings.PROLOG["SPECIALIZE_MAX_DEPTH"])
        except UsageError:
            raise
        except (PrologSyntaxError, LoadError) as e:
            logger.error(f"Prolog bench: Cannot load program: {e}")
            cls._last_error = str(e)
            return None
        except PrologError as e:
            error_msg = f"uncaught error {term_to_text(e.ball)}"
            logger.error(f"Prolog bench: {error_msg} in '{goal}'")
            cls._last_error = error_msg
            return None

    @classmethod
    def save_bench(cls, report, sources=()):
        """Сохранить результаты bench в БД."""
        from .models import BenchRun, BenchTiming

        with transaction.atomic():
            run = BenchRun.objects.create(
                query=report.query,
                sources="\n".join(str(s) for s in sources),
                repetitions=report.repetitions,
                semantics=report.semantics,
            )
            for variant, seconds in report.timings.items():
                BenchTiming.objects.create(
                    run=run,
                    variant=variant,
                    median_seconds=seconds,
                    solutions=report.solutions.get(variant, 0),
                )
        logger.info(f"Prolog bench: Saved run #{run.pk} with {len(report.timings)} timings")
        return run
