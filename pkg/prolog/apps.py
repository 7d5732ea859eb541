from django.apps import AppConfig


class PrologConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'prolog'
    verbose_name = 'Интерпретатор Prolog с модулями'
