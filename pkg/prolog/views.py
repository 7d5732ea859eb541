from django.http import JsonResponse
from django.views.decorators.csrf import csrf_exempt
from django.views.decorators.http import require_POST

from .forms import FlagsForm
from .services import PrologService

PROGRAM_NAME = "<program>"


def _flags(request):
    form = FlagsForm(request.POST)
    if not form.is_valid():
        return None, JsonResponse({"error": form.error_text()}, status=400)
    return form, None


@csrf_exempt
@require_POST
def api_query(request):
    """API endpoint: выполнить запрос к программе из поля program."""
    form, error_response = _flags(request)
    if error_response is not None:
        return error_response
    goal = request.POST.get("goal", "").strip()
    if not goal:
        return JsonResponse({"error": "goal is required"}, status=400)

    program = PrologService.load(
        texts=[(request.POST.get("program", ""), PROGRAM_NAME)],
        strict=form.cleaned_data["strict"],
        expand=form.expand,
        flags=form.semantics_flag(),
    )
    if program is None:
        return JsonResponse({"solutions": [], "output": "", "error": PrologService.get_last_error()})

    outcome = PrologService.run(
        program, goal, form.engine_options(), first_only=not form.cleaned_data["all"]
    )
    if outcome is None:
        return JsonResponse({"solutions": [], "output": "", "error": PrologService.get_last_error()})

    data = {
        "solutions": [solution.as_text() for solution in outcome.solutions],
        "output": outcome.output,
        "error": outcome.error_text,
        "meta_calls": outcome.meta_calls,
        "scope_warnings": outcome.scope_warnings,
    }
    return JsonResponse(data)


@csrf_exempt
@require_POST
def api_lint(request):
    """API endpoint: диагностики lint для программы из поля program."""
    form, error_response = _flags(request)
    if error_response is not None:
        return error_response

    diagnostics = PrologService.lint(
        texts=[(request.POST.get("program", ""), PROGRAM_NAME)],
        portability_call_n=form.cleaned_data["portability_call_n"],
        flags=form.semantics_flag(),
    )
    if diagnostics is None:
        return JsonResponse({"diagnostics": [], "error": PrologService.get_last_error()})

    data = {"diagnostics": [], "error": None}
    for d in diagnostics:
        data["diagnostics"].append(
            {
                "rule": d.rule,
                "severity": d.severity,
                "line": d.where.line,
                "column": d.where.column,
                "message": d.message,
                "predicate": f"{d.predicate[0]}/{d.predicate[1]}" if d.predicate else None,
            }
        )
    return JsonResponse(data)
