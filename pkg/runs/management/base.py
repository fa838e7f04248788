"""
Shared plumbing of the uqs_* management commands: config loading, output
directory, error-to-exit-code mapping and the run manifest.
"""
import logging
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from avg_compiler.schedule import parse_schedule
from avg_compiler.trotter import trotter_schedule
from experiments.protocols import protocol_for_model
from hardware.realize import realize_schedule
from runs.artifacts import ArtifactWriter, render_json
from runs.config import RunConfig
from runs.models import RunManifest
from runs.serializers import RunManifestSerializer
from uqsim_backend.errors import SimulationError, UsageError

logger = logging.getLogger(__name__)


class SimulationCommand(BaseCommand):
    subcommand = None

    def add_arguments(self, parser):
        parser.add_argument('--config', required=True, help='Run configuration file (uqs-ini/1)')
        parser.add_argument('--seed', type=int, help='Error-model seed; overrides [errors] seed')
        parser.add_argument('--jobs', type=int, default=1, help='Worker threads for independent runs')
        parser.add_argument('--single-thread', action='store_true', help='Force one worker (bit-identical reruns)')
        parser.add_argument('--out-dir', help='Output directory; defaults to [output] dir or UQS_OUTPUT_ROOT')
        parser.add_argument('--format', choices=['csv', 'json'], help='Table format; defaults to [output] format')

    def execute_run(self, config, writer, options):
        """Write the artifacts of one run; return the seed used, if any."""
        raise NotImplementedError

    def handle(self, *args, **options):
        config_path = options['config']
        jobs = 1 if options['single_thread'] else options['jobs']
        if jobs < 1:
            raise CommandError('--jobs must be at least 1', returncode=UsageError.exit_code)
        options['jobs'] = jobs
        writer = None
        try:
            config = RunConfig.load(config_path)
            output = config.output()
            out_dir = options['out_dir'] or output.get('dir') or (
                settings.UQS_OUTPUT_ROOT / f'{self.subcommand}-{Path(config_path).stem}'
            )
            writer = ArtifactWriter(out_dir, options['format'] or output['format'])
            seed = self.execute_run(config, writer, options)
        except SimulationError as exc:
            self.record(options, writer, None, exc.exit_code)
            logger.warning('%s failed: %s', self.subcommand, exc)
            raise CommandError(str(exc), returncode=exc.exit_code)
        self.record(options, writer, seed, 0)
        self.stdout.write(self.style.SUCCESS(
            f'{self.subcommand}: {len(writer.checksums)} artifacts in {writer.out_dir}'
        ))

    def record(self, options, writer, seed, exit_code):
        manifest = RunManifest.objects.create(
            subcommand=self.subcommand,
            config_path=str(options['config']),
            config_dialect=settings.UQS_CONFIG_DIALECT,
            seed='' if seed is None else str(seed),
            out_dir=str(writer.out_dir) if writer else '',
            output_format=writer.fmt if writer else (options['format'] or 'csv'),
            single_thread=options['single_thread'],
            jobs=options['jobs'],
            checksums=dict(writer.checksums) if writer else {},
            exit_code=exit_code,
        )
        if writer is not None:
            (writer.out_dir / 'manifest.json').write_bytes(render_json(RunManifestSerializer(manifest).data))
        logger.info('Recorded run %s (%s, exit %d)', manifest.id, self.subcommand, exit_code)
        return manifest


def compile_schedule(config, hw):
    """(target, schedule) from [compile]: Trotter compilation or the model's protocol."""
    target = config.hamiltonian(hw)
    data = config.section('compile')
    if data['mode'] == 'protocol':
        model = config.section('model')
        protocol = protocol_for_model(config.model_spec(), hw, config.geometry(hw), model['resolution'])
        return target, protocol.schedule(data['T_prime'], data['dt'])
    abstract = trotter_schedule(target, data['T_prime'], data['epsilon'], hw, data.get('repetitions'))
    return target, realize_schedule(abstract, hw)


def load_or_compile(config, hw):
    """A [simulate] schedule_file wins over compiling; the target may then be absent."""
    simulate = config.section('simulate', required=False)
    if 'schedule_file' in simulate:
        schedule = parse_schedule(config.read_file(simulate['schedule_file']))
        target = config.hamiltonian(hw) if config.has('hamiltonian') or config.has('model') else None
        return target, schedule
    return compile_schedule(config, hw)
