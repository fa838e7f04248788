# Generated by Django 4.2.7 on 2026-10-17 09:12

from django.db import migrations, models
import uuid


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='RunManifest',
            fields=[
                ('id', models.UUIDField(default=uuid.uuid4, editable=False, primary_key=True, serialize=False)),
                ('subcommand', models.CharField(choices=[('compile', 'Compile schedule'), ('simulate', 'Simulate schedule'), ('adiabatic', 'Adiabatic run'), ('cost', 'Cost report'), ('crosstalk', 'Crosstalk report')], max_length=20)),
                ('config_path', models.CharField(max_length=500)),
                ('config_dialect', models.CharField(max_length=50)),
                ('seed', models.CharField(blank=True, help_text='Error-model seed (64-bit unsigned), if any', max_length=20)),
                ('out_dir', models.CharField(max_length=500)),
                ('output_format', models.CharField(default='csv', max_length=10)),
                ('single_thread', models.BooleanField(default=False)),
                ('jobs', models.IntegerField(default=1)),
                ('checksums', models.JSONField(default=dict, help_text='Artifact name -> sha256')),
                ('exit_code', models.IntegerField(default=0)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'ordering': ['-created_at'],
            },
        ),
    ]
