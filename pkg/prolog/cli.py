"""Точка входа `python -m prolog <команда> ...`: те же команды, что и у manage.py."""

import os
import sys

SUBCOMMANDS = ("run", "repl", "expand", "lint", "specialize", "bench")
EXIT_USAGE = 64

USAGE = """usage: python -m prolog <command> [FILES ...] [flags]

commands:
  run FILES -g GOAL        load FILES and solve GOAL
  repl [FILES]             interactive top level
  expand FILES             print the program after load-time expansion
  lint FILES               check meta-predicate definitions
  specialize FILES         print the program with specialized meta-calls
  bench FILES -g GOAL -n REPS
                           time GOAL over the program variants

flags:
  --semantics=calling|lookup  --max-call-n=K  --strict  --strict-scope
  --all  --occurs-check  --no-expand
"""


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] not in SUBCOMMANDS:
        if argv and argv[0] in ("-h", "--help"):
            sys.stdout.write(USAGE)
            return 0
        sys.stderr.write(USAGE)
        if argv:
            sys.stderr.write(f"error: unknown command '{argv[0]}'\n")
        return EXIT_USAGE

    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "metaprolog.settings")
    import django
    from django.core.management import load_command_class

    django.setup()
    command = load_command_class("prolog", argv[0])
    try:
        command.run_from_argv(["python -m prolog", argv[0], *argv[1:]])
    except SystemExit as e:
        if e.code is None:
            return 0
        return e.code if isinstance(e.code, int) else 1
    return 0
