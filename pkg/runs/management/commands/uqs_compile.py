from pauli_core.textio import format_hamiltonian
from runs.artifacts import COST_COLUMNS
from runs.management.base import SimulationCommand, compile_schedule


class Command(SimulationCommand):
    help = (
        'Compile a target Hamiltonian into a pulse schedule for uqs1 or uqs2 hardware. '
        'Writes schedule.txt, hamiltonian.txt and cost.csv (columns: quantity, value).'
    )
    subcommand = 'compile'

    def execute_run(self, config, writer, options):
        hw = config.hardware()
        target, schedule = compile_schedule(config, hw)
        writer.text('schedule.txt', schedule.to_text())
        writer.text('hamiltonian.txt', format_hamiltonian(target))
        if schedule.cost is not None:
            writer.table('cost', COST_COLUMNS, sorted(schedule.cost.as_dict().items()))
            cost = schedule.cost
            self.stdout.write(f'time cost c = {cost.time_cost!r}, n = {cost.n}, L = {cost.L}, chi = {cost.chi!r}')
        for note in schedule.notes:
            self.stdout.write(note)
        self.stdout.write(f'{len(schedule.cycle)} instructions per cycle, {schedule.repetitions} repetitions')
        return None
