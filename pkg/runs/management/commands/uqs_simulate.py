from runs.artifacts import OBSERVABLE_COLUMNS
from runs.management.base import SimulationCommand, load_or_compile
from sv_engine.executor import run_schedule
from sv_engine.oracle import exact_evolve
from sv_engine.state import StateVector, dump_state, fidelity, observables, parse_state_dump
from uqsim_backend.errors import SizeMismatchError, UsageError


class Command(SimulationCommand):
    help = (
        'Run a compiled schedule on the statevector engine with optional timing errors. '
        'Writes state.txt, execlog.txt and observables.csv (columns: observable, value); '
        'with --oracle also oracle.csv (columns: quantity, value).'
    )
    subcommand = 'simulate'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--oracle', action='store_true', help='Compare with exact evolution of the target')

    def initial_state(self, config, n_qubits):
        data = config.section('simulate', required=False)
        if 'state_file' in data:
            state = parse_state_dump(config.read_file(data['state_file']))
        elif 'initial' in data:
            state = StateVector.from_bits(data['initial'])
        else:
            state = StateVector.zero(n_qubits)
        if state.n_qubits != n_qubits:
            raise SizeMismatchError(f'Initial state has {state.n_qubits} qubits, schedule {n_qubits}')
        return state

    def execute_run(self, config, writer, options):
        hw = config.hardware()
        target, schedule = load_or_compile(config, hw)
        state = self.initial_state(config, schedule.n_qubits)
        err = config.error_model(options['seed'])
        final, log = run_schedule(state, schedule, err)
        writer.text('state.txt', dump_state(final))
        writer.text('execlog.txt', log.to_text())
        requested = config.section('simulate', required=False)['observables']
        writer.table('observables', OBSERVABLE_COLUMNS, observables(final, requested))
        if options['oracle']:
            if target is None or not config.has('compile'):
                raise UsageError('--oracle needs a target and a [compile] section with T_prime')
            compile_data = config.section('compile')
            reference = exact_evolve(target, compile_data['T_prime'], state)
            value = fidelity(final, reference)
            writer.table('oracle', ['quantity', 'value'], [
                ('fidelity', value), ('T_prime', compile_data['T_prime']), ('epsilon', compile_data['epsilon']),
            ])
            self.stdout.write(f'oracle fidelity: {value!r} (epsilon {compile_data["epsilon"]!r})')
        return err.seed if err.is_active else None
