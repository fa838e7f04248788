from django.apps import AppConfig

class ExperimentsConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'experiments'
    verbose_name = 'Spin-model protocols and adiabatic runs'
