from django.apps import AppConfig


class WavepacketConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'wavepacket'
    verbose_name = 'Wave packet embeddings'
