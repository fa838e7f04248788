from django.contrib import admin
from .models import RunManifest

@admin.register(RunManifest)
class RunManifestAdmin(admin.ModelAdmin):
    list_display = ['subcommand', 'config_path', 'seed', 'output_format', 'exit_code', 'created_at']
    list_filter = ['subcommand', 'exit_code', 'created_at']
    search_fields = ['config_path', 'out_dir']
    readonly_fields = ['checksums', 'created_at']
