from ...writer import program_text
from ..base import PrologCommand


class Command(PrologCommand):
    help = "Показать программу после расширения мета-аргументов при загрузке"

    def handle(self, *args, **options):
        form = self.flags_form(options)
        program = self.load(options, form, expand=True)
        self.stdout.write(program_text(program.db), ending="")
