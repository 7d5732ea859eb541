"""Исключения интерпретатора и конструкторы термов ошибок вида error(Formal, Context)."""

from .terms import Atom, Compound, Var, qualified_indicator


class PrologException(Exception):
    """Базовое исключение интерпретатора."""


class PrologSyntaxError(PrologException):
    def __init__(self, message, file="<string>", line=0, column=0, item_start=None):
        self.message = message
        self.file = file
        self.line = line
        self.column = column
        self.item_start = item_start
        where = f"{file}:{line}:{column}"
        if item_start is not None:
            where += f" (item starting at {item_start[1]}:{item_start[2]})"
        super().__init__(f"{where}: syntax error: {message}")


class LoadError(PrologException):
    """Ошибка загрузки программы: дубликаты модулей, неоднозначный импорт, циклы."""


class DirectiveError(PrologException):
    def __init__(self, message, location=None):
        self.message = message
        self.location = location
        super().__init__(message)


class UsageError(PrologException):
    """Неверное использование командной строки."""


class PrologError(PrologException):
    """Брошенный терм (throw/1 или ошибка встроенного предиката)."""

    def __init__(self, ball):
        self.ball = ball
        super().__init__(str(ball))

    @property
    def formal(self):
        if isinstance(self.ball, Compound) and self.ball.functor == "error" and len(self.ball.args) == 2:
            return self.ball.args[0]
        return None


def _error(formal):
    return PrologError(Compound("error", (formal, Var("_", -1))))


def instantiation_error():
    return _error(Atom("instantiation_error"))


def type_error(kind, culprit):
    return _error(Compound("type_error", (Atom(kind), culprit)))


def existence_error(module, ind):
    return _error(Compound("existence_error", (Atom("procedure"), qualified_indicator(module, ind))))


def permission_error(action, kind, culprit):
    return _error(Compound("permission_error", (Atom(action), Atom(kind), culprit)))


def representation_error(what):
    return _error(Compound("representation_error", (Atom(what),)))


def resource_error(what):
    return _error(Compound("resource_error", (Atom(what),)))


def domain_error(kind, culprit):
    return _error(Compound("domain_error", (Atom(kind), culprit)))
