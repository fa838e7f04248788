from django.apps import AppConfig

class SvEngineConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'sv_engine'
    verbose_name = 'Statevector engine and exact oracle'
