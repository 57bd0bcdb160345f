from django.apps import AppConfig


class RidgeCoreConfig(AppConfig):
    name = 'ridge_core'
    verbose_name = 'Ridge atoms and combinations'
