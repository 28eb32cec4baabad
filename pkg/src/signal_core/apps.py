from django.apps import AppConfig


class SignalCoreConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'signal_core'
    verbose_name = 'Sampled signals and maximal functions'
