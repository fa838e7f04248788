from django.apps import AppConfig

class PauliCoreConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'pauli_core'
    verbose_name = 'Pauli string algebra'
