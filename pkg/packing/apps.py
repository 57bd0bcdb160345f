from django.apps import AppConfig


class PackingConfig(AppConfig):
    name = 'packing'
    verbose_name = 'Sine family packings'
