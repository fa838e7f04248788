import csv
import io
import json
import tempfile
import uuid
from pathlib import Path
from xml.etree import ElementTree

from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase, tag
from django.urls import reverse
from rest_framework import status
from rest_framework.test import APITestCase

from avg_compiler.schedule import PulseSchedule, parse_schedule
from sv_engine.state import StateVector, dump_state
from uqsim_backend.errors import ParseError, UsageError
from .artifacts import sha256_file
from .config import RunConfig
from .models import RunManifest

CONFIGS = Path(settings.UQS_BUNDLED_CONFIGS)

SMALL_RAMP = """
[hardware]
platform = uqs2
n_ions = 3

[model]
name = dipole

[adiabatic]
initial = xx_chain
steps = 20
theta1 = 0.05
"""

NOISELESS_ISING = """
[hardware]
platform = uqs2
n_ions = 3

[hamiltonian]
terms =
    0.5 Z Z I
    0.5 I Z Z
    0.3 X I I
    0.3 I I X

[compile]
T_prime = 0.5
epsilon = 0.01

[simulate]
observables = Z0; Z0 Z1
"""


def read_csv(path):
    with open(path, newline='') as handle:
        return list(csv.DictReader(handle))


class CommandTestCase(TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)
        self.addCleanup(self._tmp.cleanup)

    def write_config(self, text, name='run.cfg'):
        path = self.tmp / name
        path.write_text(text)
        return path

    def run_command(self, name, config, *args, out='out'):
        stdout = io.StringIO()
        out_dir = self.tmp / out
        call_command(name, '--config', str(config), '--out-dir', str(out_dir), *args, stdout=stdout)
        return out_dir, stdout.getvalue()

    def assertExitCode(self, code, name, config, *args):
        with self.assertRaises(CommandError) as ctx:
            self.run_command(name, config, *args)
        self.assertEqual(ctx.exception.returncode, code)
        return str(ctx.exception)


class CompileCommandTests(CommandTestCase):
    def test_heisenberg_chain_on_lattice(self):
        out_dir, stdout = self.run_command('uqs_compile', CONFIGS / 'heisenberg_uqs1.cfg')
        text = (out_dir / 'schedule.txt').read_text()
        schedule = parse_schedule(text)
        self.assertEqual(parse_schedule(schedule.to_text()), schedule)
        self.assertEqual(len(schedule.local_layers()), 3)
        cost = {row['quantity']: float(row['value']) for row in read_csv(out_dir / 'cost.csv')}
        self.assertAlmostEqual(cost['time_cost'], 1.5, places=12)
        self.assertIn('time cost c = 1.5', stdout)

    def test_sign_condition_violation(self):
        config = self.write_config(
            '[hardware]\nplatform = uqs1\nshape = 4\n\n[model]\nname = heisenberg\nJ = 1.0\n\n'
            '[compile]\nT_prime = 1.0\n'
        )
        message = self.assertExitCode(2, 'uqs_compile', config)
        self.assertIn('sign of gamma', message)
        self.assertEqual(RunManifest.objects.get().exit_code, 2)

    def test_empty_hamiltonian(self):
        config = self.write_config(
            '[hardware]\nplatform = uqs2\nn_ions = 3\n\n[hamiltonian]\nterms = 0.0 Z Z I\n\n'
            '[compile]\nT_prime = 1.0\n'
        )
        out_dir, _ = self.run_command('uqs_compile', config)
        schedule = parse_schedule((out_dir / 'schedule.txt').read_text())
        self.assertEqual(len(schedule), 0)
        self.assertEqual(schedule.cost.time_cost, 0.0)

    def test_protocol_mode(self):
        config = self.write_config(
            '[hardware]\nplatform = uqs2\nn_ions = 3\n\n[model]\nname = dipole\n\n'
            '[compile]\nT_prime = 0.4\nmode = protocol\ndt = 0.1\n'
        )
        out_dir, _ = self.run_command('uqs_compile', config)
        schedule = parse_schedule((out_dir / 'schedule.txt').read_text())
        self.assertEqual(schedule.repetitions, 4)
        self.assertEqual({g.gate_id for g in schedule.gates()}, {'push'})

    def test_malformed_config_reports_line(self):
        config = self.write_config('[hardware]\nplatform = uqs2\nthis line has no delimiter\n')
        message = self.assertExitCode(1, 'uqs_compile', config)
        self.assertIn('line 3', message)

    def test_invalid_field_is_named(self):
        config = self.write_config(
            '[hardware]\nplatform = uqs2\nn_ions = 2\n\n[hamiltonian]\nterms = 1.0 Z Z\n\n'
            '[compile]\nT_prime = 1.0\nepsilon = -1\n'
        )
        message = self.assertExitCode(1, 'uqs_compile', config)
        self.assertIn('compile.epsilon', message)

    def test_missing_config_file(self):
        self.assertExitCode(1, 'uqs_compile', self.tmp / 'absent.cfg')

    def test_manifest_lists_checksums(self):
        out_dir, _ = self.run_command('uqs_compile', CONFIGS / 'heisenberg_uqs1.cfg')
        manifest = RunManifest.objects.get()
        self.assertEqual(manifest.subcommand, 'compile')
        self.assertEqual(set(manifest.checksums), {'schedule.txt', 'hamiltonian.txt', 'cost.csv'})
        for name, digest in manifest.checksums.items():
            self.assertEqual(sha256_file(out_dir / name), digest)
        written = json.loads((out_dir / 'manifest.json').read_text())
        self.assertEqual(written['id'], str(manifest.id))
        self.assertEqual(written['config_dialect'], 'uqs-ini/1')

    def test_reruns_reproduce_hashes(self):
        self.run_command('uqs_compile', CONFIGS / 'heisenberg_uqs1.cfg', '--single-thread', out='a')
        self.run_command('uqs_compile', CONFIGS / 'heisenberg_uqs1.cfg', '--single-thread', out='b')
        first, second = RunManifest.objects.order_by('created_at')
        self.assertEqual(first.checksums, second.checksums)


class SimulateCommandTests(CommandTestCase):
    def test_seeded_runs_are_bit_identical(self):
        config = CONFIGS / 'ising_noisy.cfg'
        a, _ = self.run_command('uqs_simulate', config, '--seed', '7', '--single-thread', out='a')
        b, _ = self.run_command('uqs_simulate', config, '--seed', '7', '--single-thread', out='b')
        self.assertEqual((a / 'state.txt').read_bytes(), (b / 'state.txt').read_bytes())
        self.assertEqual(RunManifest.objects.filter(seed='7').count(), 2)

    def test_error_model_without_seed(self):
        message = self.assertExitCode(3, 'uqs_simulate', CONFIGS / 'ising_noisy.cfg')
        self.assertIn('seed', message)

    def test_oracle_comparison(self):
        out_dir, stdout = self.run_command('uqs_simulate', self.write_config(NOISELESS_ISING), '--oracle')
        values = {row['quantity']: float(row['value']) for row in read_csv(out_dir / 'oracle.csv')}
        self.assertGreaterEqual(values['fidelity'], 1 - 2 * 0.01)
        self.assertIn('oracle fidelity', stdout)
        rows = read_csv(out_dir / 'observables.csv')
        self.assertEqual([row['observable'] for row in rows], ['Z0', 'Z0 Z1'])

    def test_identity_schedule_keeps_state(self):
        (self.tmp / 'identity.txt').write_text(PulseSchedule.empty(2, hardware='uqs2').to_text())
        config = self.write_config(
            '[hardware]\nplatform = uqs2\nn_ions = 2\n\n'
            '[simulate]\nschedule_file = identity.txt\ninitial = 01\n'
        )
        out_dir, _ = self.run_command('uqs_simulate', config)
        self.assertEqual((out_dir / 'state.txt').read_text(), dump_state(StateVector.from_bits('01')))

    def test_json_tables(self):
        out_dir, _ = self.run_command('uqs_simulate', self.write_config(NOISELESS_ISING), '--format', 'json')
        table = json.loads((out_dir / 'observables.json').read_text())
        self.assertEqual(table['columns'], ['observable', 'value'])
        self.assertEqual(len(table['rows']), 2)


class AdiabaticCommandTests(CommandTestCase):
    def test_trajectory_histogram_and_plots(self):
        out_dir, stdout = self.run_command('uqs_adiabatic', self.write_config(SMALL_RAMP))
        trajectory = read_csv(out_dir / 'trajectory.csv')
        self.assertEqual(len(trajectory), 20)
        self.assertEqual(list(trajectory[0]), ['step', 'k', 'fidelity', 'energy'])
        histogram = read_csv(out_dir / 'histogram.csv')
        self.assertAlmostEqual(sum(float(row['weight']) for row in histogram), 1.0, places=9)
        for name in ('trajectory.svg', 'histogram.svg'):
            root = ElementTree.fromstring((out_dir / name).read_bytes())
            self.assertEqual(root.attrib['viewBox'].split()[2:], ['800', '600'])
        summary = json.loads((out_dir / 'summary.json').read_text())
        self.assertEqual(summary['steps'], 20)
        self.assertIn('final ground-space weight', stdout)

    def test_single_step(self):
        out_dir, _ = self.run_command('uqs_adiabatic', self.write_config(SMALL_RAMP), '--steps', '1')
        self.assertEqual(len(read_csv(out_dir / 'trajectory.csv')), 1)

    def test_plots_are_reproducible(self):
        config = self.write_config(SMALL_RAMP)
        self.run_command('uqs_adiabatic', config, out='a')
        self.run_command('uqs_adiabatic', config, out='b')
        first, second = RunManifest.objects.order_by('created_at')
        self.assertEqual(first.checksums['trajectory.svg'], second.checksums['trajectory.svg'])
        self.assertEqual(first.checksums, second.checksums)

    def test_sweep(self):
        config = self.write_config(SMALL_RAMP + '\n[sweep]\netas = 0, 0.02\nsteps = 5, 10\nrepetitions = 3\n')
        out_dir, _ = self.run_command('uqs_adiabatic', config, '--jobs', '2', out='parallel')
        rows = read_csv(out_dir / 'sweep.csv')
        self.assertEqual(len(rows), 4)
        zero = [row for row in rows if float(row['eta']) == 0.0]
        self.assertTrue(all(row['repetitions'] == '1' and float(row['std']) == 0.0 for row in zero))
        serial_dir, _ = self.run_command('uqs_adiabatic', config, '--single-thread', out='serial')
        self.assertEqual((serial_dir / 'sweep.csv').read_bytes(), (out_dir / 'sweep.csv').read_bytes())

    @tag('slow')
    def test_bundled_fig4a(self):
        out_dir, _ = self.run_command('uqs_adiabatic', CONFIGS / 'fig4a.cfg')
        self.assertEqual(len(read_csv(out_dir / 'trajectory.csv')), 100)
        summary = json.loads((out_dir / 'summary.json').read_text())
        self.assertGreater(summary['min_gap'], 0.0)

    @tag('slow')
    def test_bundled_fig5(self):
        out_dir, _ = self.run_command('uqs_adiabatic', CONFIGS / 'fig5.cfg')
        histogram = read_csv(out_dir / 'histogram.csv')
        energies = [float(row['energy']) for row in histogram]
        self.assertEqual(energies, sorted(energies))
        weights = [float(row['weight']) for row in histogram]
        self.assertAlmostEqual(sum(weights), 1.0, places=9)
        # 500 steps with 1% errors leaves most weight in the lowest groups
        self.assertEqual(weights[0], max(weights))
        self.assertGreater(sum(weights[:2]), 0.5)
        self.assertEqual(len(read_csv(out_dir / 'trajectory.csv')), 500)


class CostCommandTests(CommandTestCase):
    def test_antisymmetric_coupling(self):
        out_dir, _ = self.run_command('uqs_cost', CONFIGS / 'antisym_cost.cfg')
        cost = {row['quantity']: float(row['value']) for row in read_csv(out_dir / 'cost.csv')}
        self.assertAlmostEqual(cost['time_cost'], 2 * 0.5 / 1.0, places=12)
        families = read_csv(out_dir / 'families.csv')
        self.assertEqual([row['pair'] for row in families], ['0-1'])


class CrosstalkCommandTests(CommandTestCase):
    def test_pairs_ten_sites_apart(self):
        out_dir, stdout = self.run_command('uqs_crosstalk', CONFIGS / 'crosstalk.cfg')
        rows = read_csv(out_dir / 'crosstalk.csv')
        self.assertAlmostEqual(float(rows[0]['ratio']), 1e-3, places=15)
        summary = json.loads((out_dir / 'crosstalk_summary.json').read_text())
        self.assertEqual(summary['verdict'], 'serialized')
        self.assertIn('serialized', stdout)

    def test_single_group(self):
        config = self.write_config('[hardware]\nplatform = uqs2\nn_ions = 4\n\n[crosstalk]\ngroups = 1,2\n')
        out_dir, _ = self.run_command('uqs_crosstalk', config)
        summary = json.loads((out_dir / 'crosstalk_summary.json').read_text())
        self.assertEqual(summary['max_ratio'], 0.0)

    def test_needs_trap_array(self):
        config = self.write_config('[hardware]\nplatform = uqs1\nshape = 4\n\n[crosstalk]\ngroups = 0,1\n')
        self.assertExitCode(1, 'uqs_crosstalk', config)


class RunConfigTests(SimpleTestCase):
    def test_dialect_mismatch(self):
        with self.assertRaises(UsageError):
            RunConfig.from_string('[output]\ndialect = uqs-ini/0\n')

    def test_unknown_section(self):
        with self.assertRaises(UsageError):
            RunConfig.from_string('[plots]\nstyle = dark\n')

    def test_duplicate_section_line(self):
        with self.assertRaises(ParseError) as ctx:
            RunConfig.from_string('[compile]\nT_prime = 1\n[compile]\nT_prime = 2\n')
        self.assertEqual(ctx.exception.line, 3)

    def test_model_section(self):
        config = RunConfig.from_string(
            '[model]\nname = random_ising\ncouplings = 0-1: 0.5; 1-2: -0.3\nsite_fields = 0.1, 0.2, 0.3\n'
        )
        spec = config.model_spec()
        self.assertEqual(spec.couplings, {(0, 1): 0.5, (1, 2): -0.3})
        self.assertEqual(spec.fields, (0.1, 0.2, 0.3))

    def test_seed_flag_wins(self):
        config = RunConfig.from_string('[errors]\neta_local = 0.01\nseed = 3\n')
        self.assertEqual(config.error_model().seed, 3)
        self.assertEqual(config.error_model(seed=9).seed, 9)

    def test_bundled_ramp_configs(self):
        angles = {'fig4a.cfg': 0.1, 'fig4b.cfg': 0.025, 'fig5.cfg': 0.025}
        for name, theta1 in angles.items():
            config = RunConfig.load(CONFIGS / name)
            self.assertEqual(config.raw('hardware')['platform'], 'uqs2', name)
            self.assertEqual(config.section('adiabatic')['theta1'], theta1, name)
        sweep = RunConfig.load(CONFIGS / 'fig4b.cfg').section('sweep')
        self.assertEqual(sweep['etas'], [0.0, 0.01, 0.02, 0.03, 0.04])
        self.assertEqual(sweep['steps'], [100, 250, 500, 1500])

    def test_file_references_resolve_next_to_config(self):
        with tempfile.TemporaryDirectory() as tmp:
            Path(tmp, 'target.txt').write_text('1.0 Z Z\n')
            Path(tmp, 'hw.ini').write_text('platform = uqs2\nn_ions = 2\n')
            path = Path(tmp, 'run.cfg')
            path.write_text('[hardware]\nfile = hw.ini\n\n[hamiltonian]\nfile = target.txt\n')
            config = RunConfig.load(path)
            hw = config.hardware()
            self.assertEqual(hw.n_qubits, 2)
            self.assertEqual(config.hamiltonian(hw).coefficient('ZZ'), 1.0)


class RunApiTests(APITestCase):
    def setUp(self):
        self.compile_run = RunManifest.objects.create(
            subcommand='compile', config_path='a.cfg', config_dialect='uqs-ini/1', out_dir='out/a',
            checksums={'schedule.txt': '0' * 64},
        )
        RunManifest.objects.create(
            subcommand='adiabatic', config_path='b.cfg', config_dialect='uqs-ini/1', out_dir='out/b', seed='5',
        )

    def test_list(self):
        response = self.client.get(reverse('run_list'))
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['total_runs'], 2)

    def test_filter_by_subcommand(self):
        response = self.client.get(reverse('run_list'), {'subcommand': 'adiabatic'})
        self.assertEqual(response.data['total_runs'], 1)
        self.assertEqual(response.data['runs'][0]['seed'], '5')

    def test_detail(self):
        response = self.client.get(reverse('run_detail', args=[self.compile_run.id]))
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data['checksums'], {'schedule.txt': '0' * 64})

    def test_unknown_run(self):
        response = self.client.get(reverse('run_detail', args=[uuid.uuid4()]))
        self.assertEqual(response.status_code, status.HTTP_404_NOT_FOUND)

    def test_runs_are_read_only(self):
        response = self.client.post(reverse('run_list'), {}, format='json')
        self.assertEqual(response.status_code, status.HTTP_405_METHOD_NOT_ALLOWED)

    def test_health(self):
        response = self.client.get('/health/')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.json()['status'], 'healthy')
