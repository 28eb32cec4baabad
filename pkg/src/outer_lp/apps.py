from django.apps import AppConfig


class OuterLpConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'outer_lp'
    verbose_name = 'Outer L^p tents and sizes'
