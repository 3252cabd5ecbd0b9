from django.apps import AppConfig


class QuimiotaxisConfig(AppConfig):
    name = 'quimiotaxis'
    verbose_name = 'Keller-Segel con difusion degenerada'
