from django.core.management.base import CommandError

from ...exceptions import LoadError
from ...services import PrologService
from ..base import EXIT_FAILURE, EXIT_LOAD_ERROR, PrologCommand


class Command(PrologCommand):
    help = "Сравнить время запроса для вариантов программы: runtime, expanded, specialized, univ"

    def add_command_arguments(self, parser):
        parser.add_argument("-g", "--goal", required=True, help="Запрос")
        parser.add_argument("-n", "--repetitions", type=int, default=100, help="Число повторений")
        parser.add_argument("--variant", action="append", dest="variants", help="Вариант (можно повторять)")
        parser.add_argument("--save", action="store_true", help="Сохранить результаты в БД")

    def handle(self, *args, **options):
        form = self.flags_form(options)
        try:
            texts = PrologService.read_sources(options["files"])
        except LoadError as e:
            raise CommandError(str(e), returncode=EXIT_LOAD_ERROR) from e
        report = PrologService.bench(
            texts, options["goal"], options["repetitions"], options["variants"], form.engine_options()
        )
        if report is None:
            error = PrologService.get_last_error()
            code = EXIT_FAILURE if error.startswith("uncaught error") else EXIT_LOAD_ERROR
            raise CommandError(error, returncode=code)
        self.stdout.write(report.table(), ending="")
        if options["save"] and report.timings:
            run = PrologService.save_bench(report, options["files"])
            self.stdout.write(f"saved bench run #{run.pk}")
