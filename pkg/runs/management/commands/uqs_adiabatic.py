from experiments.adiabatic import AdiabaticConfig, adiabatic_run, error_sweep, min_gap
from runs.artifacts import (
    HISTOGRAM_COLUMNS, SWEEP_COLUMNS, TRAJECTORY_COLUMNS, histogram_plot, sweep_plot, trajectory_plot,
)
from runs.management.base import SimulationCommand


class Command(SimulationCommand):
    help = (
        'Adiabatic ground-state preparation along H(k) = k H0 + (1-k) H. Writes trajectory.csv '
        '(columns: step, k, fidelity, energy), histogram.csv (columns: group, energy, weight), '
        'trajectory.svg, histogram.svg and summary.json; with a [sweep] section writes '
        'sweep.csv (columns: eta, steps, mean_fidelity, std, sem, repetitions) and sweep.svg instead.'
    )
    subcommand = 'adiabatic'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--steps', type=int, help='Override the number of adiabatic steps')

    def execute_run(self, config, writer, options):
        hw = config.hardware()
        target = config.hamiltonian(hw)
        initial = config.initial_hamiltonian(hw)
        data = config.section('adiabatic')
        steps = options['steps'] or data['steps']
        err = config.error_model(options['seed'])
        adiabatic = AdiabaticConfig(initial, target, steps, data['theta1'], data['ramp'], err,
                                    data['record_every'], data['stepping'])
        if config.has('sweep'):
            sweep = config.section('sweep')
            seed = options['seed'] if options['seed'] is not None else sweep['seed']
            steps_list = [options['steps']] if options['steps'] else sweep['steps']
            rows = error_sweep(adiabatic, hw, sweep['etas'], steps_list, sweep['repetitions'], seed,
                               options['jobs'])
            writer.table('sweep', SWEEP_COLUMNS, [row.as_dict() for row in rows])
            writer.figure('sweep.svg', sweep_plot(rows))
            for row in rows:
                self.stdout.write(f'eta={row.eta!r} steps={row.steps}: {row.mean:.6f} ± {row.sem:.2g}')
            return seed

        result = adiabatic_run(adiabatic, hw)
        writer.table('trajectory', TRAJECTORY_COLUMNS,
                     [(p.step, p.k, p.fidelity, p.energy) for p in result.trajectory])
        writer.table('histogram', HISTOGRAM_COLUMNS,
                     [(j, energy, weight) for j, (energy, weight) in enumerate(result.histogram)])
        writer.figure('trajectory.svg', trajectory_plot(result.trajectory))
        writer.figure('histogram.svg', histogram_plot(result.histogram))
        summary = {
            'n_qubits': adiabatic.n_qubits,
            'steps': steps,
            'theta1': adiabatic.theta1,
            'ramp': adiabatic.ramp,
            'stepping': adiabatic.stepping,
            'eta_local': err.eta_local,
            'eta_int': err.eta_int,
            'seed': err.seed,
            'final_fidelity': result.final_fidelity,
            'total_time': result.total_time,
        }
        if data['gap_samples']:
            gap = min_gap(initial, target, data['gap_samples'])
            summary.update(min_gap=gap.min_gap, k_at_min=gap.k_at_min, recommended_time=gap.recommended_time)
        writer.json('summary.json', summary)
        if err.is_active:
            writer.text('execlog.txt', result.log.to_text())
        self.stdout.write(f'final ground-space weight: {result.final_fidelity:.6f}')
        return err.seed if err.is_active else None
