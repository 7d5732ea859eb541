from django.core.management.base import CommandError

from ...lint import exit_code
from ...services import PrologService
from ..base import EXIT_LOAD_ERROR, PrologCommand


class Command(PrologCommand):
    help = "Проверить мета-предикаты: правила SR1-SR3, директивы, переносимость call/N"

    def add_command_arguments(self, parser):
        parser.add_argument("--format", choices=["text", "records"], default="records", help="Формат вывода")
        parser.add_argument("--portability-call-n", type=int, help="Переносимый предел N для call/N")

    def handle(self, *args, **options):
        form = self.flags_form(options)
        diagnostics = PrologService.lint(
            sources=options["files"],
            portability_call_n=form.cleaned_data["portability_call_n"],
            flags=form.semantics_flag(),
        )
        if diagnostics is None:
            raise CommandError(PrologService.get_last_error(), returncode=EXIT_LOAD_ERROR)
        for diagnostic in diagnostics:
            self.stdout.write(diagnostic.record() if options["format"] == "records" else diagnostic.text())
        self.exit_code = exit_code(diagnostics)
