from django.db import models
import uuid

class RunManifest(models.Model):
    """One management-command run and the artifacts it wrote"""

    SUBCOMMANDS = [
        ('compile', 'Compile schedule'),
        ('simulate', 'Simulate schedule'),
        ('adiabatic', 'Adiabatic run'),
        ('cost', 'Cost report'),
        ('crosstalk', 'Crosstalk report'),
    ]

    id = models.UUIDField(primary_key=True, default=uuid.uuid4, editable=False)
    subcommand = models.CharField(max_length=20, choices=SUBCOMMANDS)
    config_path = models.CharField(max_length=500)
    config_dialect = models.CharField(max_length=50)
    seed = models.CharField(max_length=20, blank=True, help_text='Error-model seed (64-bit unsigned), if any')
    out_dir = models.CharField(max_length=500)
    output_format = models.CharField(max_length=10, default='csv')
    single_thread = models.BooleanField(default=False)
    jobs = models.IntegerField(default=1)
    checksums = models.JSONField(default=dict, help_text='Artifact name -> sha256')
    exit_code = models.IntegerField(default=0)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created_at']

    def __str__(self):
        return f"{self.subcommand} - {self.config_path} - {self.created_at}"
