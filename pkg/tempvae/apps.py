from django.apps import AppConfig


class TempvaeConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "tempvae"
    verbose_name = "Temporal variational autoencoder"
