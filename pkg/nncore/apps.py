from django.apps import AppConfig


class NncoreConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "nncore"
    verbose_name = "Differentiable computation core"
