from django.apps import AppConfig


class VarcarlesonConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'varcarleson'
    verbose_name = 'Variation-norm Carleson operator'
