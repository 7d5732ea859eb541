"""Общая основа команд интерпретатора: глобальные флаги, загрузка программы и коды выхода."""

import sys

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from ..exceptions import UsageError
from ..forms import FlagsForm
from ..services import PrologService

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_LOAD_ERROR = 2
EXIT_USAGE = 64


class RawOutput:
    """Поток для write/1: без добавления перевода строки, который вставляет OutputWrapper."""

    def __init__(self, wrapper):
        self.wrapper = wrapper

    def write(self, text):
        self.wrapper.write(text, ending="")

    def flush(self):
        self.wrapper.flush()


def _usage_error(parser, message):
    if parser.called_from_command_line:
        parser.print_usage(sys.stderr)
        parser.exit(EXIT_USAGE, f"{parser.prog}: error: {message}\n")
    raise CommandError(f"Error: {message}", returncode=EXIT_USAGE)


class PrologCommand(BaseCommand):
    files_required = True
    exit_code = EXIT_OK

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        parser.error = lambda message: _usage_error(parser, message)
        return parser

    def add_arguments(self, parser):
        parser.add_argument("files", nargs="+" if self.files_required else "*", help="Файлы программы")
        parser.add_argument("--semantics", help="calling | lookup: что задаёт квалификация M:G")
        parser.add_argument("--max-call-n", type=int, help="Наибольшее N для call/N")
        parser.add_argument("--max-depth", type=int, help="Предел глубины вывода")
        parser.add_argument("--max-solutions", type=int, help="Предел числа решений")
        parser.add_argument("--strict", action="store_true", help="Диагностики-ошибки прерывают загрузку")
        parser.add_argument(
            "--strict-scope", action="store_true", help="Вызов неэкспортированного предиката через M:G - ошибка"
        )
        parser.add_argument("--all", action="store_true", help="Перечислить все решения")
        parser.add_argument("--occurs-check", action="store_true", help="Унификация с проверкой вхождения")
        parser.add_argument("--no-expand", action="store_true", help="Не расширять клаузы при загрузке")
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def execute(self, *args, **options):
        limit = settings.PROLOG["RECURSION_LIMIT"]
        if limit and sys.getrecursionlimit() < limit:
            sys.setrecursionlimit(limit)
        self.exit_code = EXIT_OK
        try:
            return super().execute(*args, **options)
        except UsageError as e:
            raise CommandError(str(e), returncode=EXIT_USAGE) from e

    def run_from_argv(self, argv):
        super().run_from_argv(argv)
        if self.exit_code:
            sys.exit(self.exit_code)

    def flags_form(self, options):
        form = FlagsForm(data={name: options.get(name) for name in FlagsForm.base_fields})
        if not form.is_valid():
            raise UsageError(form.error_text())
        return form

    def load(self, options, form, expand=None):
        """Загрузить файлы; диагностики загрузки печатаются в stderr."""
        program = PrologService.load(
            sources=options["files"],
            strict=form.cleaned_data["strict"],
            expand=form.expand if expand is None else expand,
            flags=form.semantics_flag(),
        )
        if program is None:
            raise CommandError(PrologService.get_last_error(), returncode=EXIT_LOAD_ERROR)
        for diagnostic in program.diagnostics:
            self.stderr.write(diagnostic.text())
        return program
