from ...services import PrologService
from ...writer import term_to_text
from ..base import EXIT_FAILURE, PrologCommand, RawOutput


class Command(PrologCommand):
    help = "Загрузить файлы и выполнить запрос: run FILES -g GOAL"

    def add_command_arguments(self, parser):
        parser.add_argument("-g", "--goal", required=True, help="Запрос, например \"client:test(Me)\"")

    def handle(self, *args, **options):
        form = self.flags_form(options)
        program = self.load(options, form)
        enumerate_all = form.cleaned_data["all"]
        printed = []

        def show(solution):
            if printed:
                self.stdout.write(";")
            printed.append(solution)
            for line in solution.lines():
                self.stdout.write(line)

        outcome = PrologService.run(
            program,
            options["goal"],
            form.engine_options(),
            output=RawOutput(self.stdout),
            on_solution=show,
            first_only=not enumerate_all,
        )
        if outcome is None:
            self.stderr.write(f"ERROR: {PrologService.get_last_error()}")
            self.exit_code = EXIT_FAILURE
            return
        if outcome.error is not None:
            self.stderr.write(f"ERROR: {term_to_text(outcome.error, quoted=True)}")
            self.exit_code = EXIT_FAILURE
            return
        if outcome.solutions:
            self.stdout.write("yes")
        else:
            self.stdout.write("no")
            self.exit_code = EXIT_FAILURE
