from django.apps import AppConfig

class AvgCompilerConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'avg_compiler'
    verbose_name = 'Average Hamiltonian compiler'
