from django.apps import AppConfig


class SpectralConfig(AppConfig):
    name = 'spectral'
    verbose_name = 'Spectral measures and integral representations'
