import sys

from ...engine import Engine
from ...exceptions import PrologError, PrologSyntaxError
from ...writer import term_to_text
from ..base import PrologCommand, RawOutput

PROMPT = "?- "


class Command(PrologCommand):
    help = "Интерактивный режим: запросы из stdin, ';' запрашивает следующее решение"
    files_required = False
    stealth_options = ("stdin",)

    def handle(self, *args, **options):
        form = self.flags_form(options)
        program = self.load(options, form)
        self.input = options.get("stdin") or sys.stdin
        engine = Engine(program.db, form.engine_options(), RawOutput(self.stdout))
        while True:
            query = self.read_query()
            if query is None or query.strip() in ("halt.", "halt"):
                break
            if query.strip():
                self.answer(engine, query)

    def read_query(self):
        """Строки до завершающей точки; None в конце ввода."""
        lines = []
        self.stdout.write(PROMPT, ending="")
        self.stdout.flush()
        while True:
            line = self.input.readline()
            if not line:
                return "\n".join(lines) if lines else None
            lines.append(line.rstrip("\n"))
            text = "\n".join(lines).strip()
            if not text or text.endswith("."):
                return text
            self.stdout.write("|    ", ending="")

    def answer(self, engine, query):
        try:
            solutions = engine.query(query)
            for solution in solutions:
                lines = solution.lines()
                if not lines:
                    self.stdout.write("yes")
                    solutions.close()
                    return
                self.stdout.write("\n".join(lines), ending=" ")
                self.stdout.flush()
                reply = self.input.readline().strip()
                if reply != ";":
                    self.stdout.write("")
                    self.stdout.write("yes")
                    solutions.close()
                    return
            self.stdout.write("no")
        except PrologSyntaxError as e:
            self.stderr.write(f"ERROR: {e}")
        except PrologError as e:
            self.stderr.write(f"ERROR: {term_to_text(e.ball, quoted=True)}")
