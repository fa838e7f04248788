from avg_compiler.schedule import CostReport
from avg_compiler.trotter import plan_cycle
from runs.artifacts import COST_COLUMNS, FAMILY_COLUMNS
from runs.management.base import SimulationCommand


class Command(SimulationCommand):
    help = (
        'Report the time cost of simulating a target on the given hardware without building '
        'the schedule. Writes cost.csv (columns: quantity, value) and families.csv '
        '(columns: gate_id, pair, time_cost, optimal_time_cost, steps).'
    )
    subcommand = 'cost'

    def execute_run(self, config, writer, options):
        hw = config.hardware()
        target = config.hamiltonian(hw)
        data = config.section('compile')
        plan = plan_cycle(target, hw)
        cost = CostReport.from_budget(plan.time_cost, plan.n_steps, data['T_prime'], data['epsilon'],
                                      plan.optimal_time_cost, data.get('repetitions'))
        writer.table('cost', COST_COLUMNS, sorted(cost.as_dict().items()))
        writer.table('families', FAMILY_COLUMNS, [
            (fp.family.gate_id, '-'.join(map(str, fp.family.pair)) if fp.family.pair else '',
             fp.time_cost, fp.synthesis.optimal_time_cost, fp.synthesis.sequence.n)
            for fp in plan.families
        ])
        self.stdout.write(f'time cost c = {cost.time_cost!r} (lower bound {cost.optimal_time_cost!r})')
        self.stdout.write(f'L = {cost.L}, n = {cost.n}, chi = {cost.chi!r}')
        return None
