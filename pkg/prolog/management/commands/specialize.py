from django.core.management.base import CommandError

from ...services import PrologService
from ...writer import program_text
from ..base import EXIT_LOAD_ERROR, PrologCommand


class Command(PrologCommand):
    help = "Заменить вызовы мета-предикатов с известными мета-аргументами вспомогательными предикатами"

    def handle(self, *args, **options):
        form = self.flags_form(options)
        program = self.load(options, form)
        report = PrologService.specialize(program, form.semantics_flag())
        if report is None:
            raise CommandError(PrologService.get_last_error(), returncode=EXIT_LOAD_ERROR)
        for diagnostic in report.diagnostics:
            self.stderr.write(diagnostic.record())
        self.stdout.write(program_text(program.db), ending="")
