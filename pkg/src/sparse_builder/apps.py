from django.apps import AppConfig


class SparseBuilderConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'sparse_builder'
    verbose_name = 'Stopping-time sparse collections'
