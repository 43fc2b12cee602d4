from django.apps import AppConfig


class StacklinConfig(AppConfig):
    name = 'stacklin'
    verbose_name = 'Stack linearizability checking'
