from django import forms
from django.conf import settings

from .engine import EngineOptions
from .expander import SemanticsFlag


def prolog_setting(name):
    return settings.PROLOG.get(name)


class FlagsForm(forms.Form):
    """Флаги запуска: семантика `M:G`, предел call/N, строгие режимы."""

    SEMANTICS_CHOICES = [
        ("calling", "calling: M:G задаёт контекст вызова"),
        ("lookup", "lookup: M:G задаёт только контекст поиска"),
    ]

    semantics = forms.ChoiceField(choices=SEMANTICS_CHOICES, required=False)
    max_call_n = forms.IntegerField(min_value=1, required=False)
    portability_call_n = forms.IntegerField(min_value=1, required=False)
    max_depth = forms.IntegerField(min_value=1, required=False)
    max_solutions = forms.IntegerField(min_value=1, required=False)
    strict = forms.BooleanField(required=False)
    strict_scope = forms.BooleanField(required=False)
    all = forms.BooleanField(required=False)
    occurs_check = forms.BooleanField(required=False)
    no_expand = forms.BooleanField(required=False)

    DEFAULTS = {
        "semantics": "SEMANTICS",
        "max_call_n": "MAX_CALL_N",
        "portability_call_n": "PORTABILITY_CALL_N",
        "max_depth": "MAX_DEPTH",
        "max_solutions": "MAX_SOLUTIONS",
    }

    def clean(self):
        cleaned_data = super().clean()
        for field, setting in self.DEFAULTS.items():
            if cleaned_data.get(field) in (None, ""):
                cleaned_data[field] = prolog_setting(setting)
        if cleaned_data.get("semantics") not in ("calling", "lookup"):
            raise forms.ValidationError(
                f"Неизвестная семантика: {cleaned_data.get('semantics')} (ожидается calling или lookup)"
            )
        return cleaned_data

    @property
    def expand(self):
        return not self.cleaned_data["no_expand"]

    def semantics_flag(self):
        return SemanticsFlag(
            colon_sets_calling_context=self.cleaned_data["semantics"] == "calling",
            max_call_n=self.cleaned_data["max_call_n"],
        )

    def engine_options(self):
        return EngineOptions(
            semantics=self.semantics_flag(),
            occurs_check=self.cleaned_data["occurs_check"],
            strict_scope=self.cleaned_data["strict_scope"],
            max_depth=self.cleaned_data["max_depth"],
            max_solutions=self.cleaned_data["max_solutions"],
        )

    def error_text(self):
        """Ошибки формы одной строкой для сообщений командной строки и API."""
        parts = []
        for field, errors in self.errors.items():
            label = "flags" if field == "__all__" else f"--{field.replace('_', '-')}"
            parts.append(f"{label}: {' '.join(errors)}")
        return "; ".join(parts)
