from hardware.traps import TrapArrayModel, crosstalk_report
from runs.artifacts import CROSSTALK_COLUMNS
from runs.management.base import SimulationCommand
from uqsim_backend.errors import UsageError


class Command(SimulationCommand):
    help = (
        'Parasitic-to-intended coupling ratio of ion groups pushed together on a uqs2 trap '
        'array. Writes crosstalk.csv (columns: group_a, group_b, ratio) and crosstalk_summary.json.'
    )
    subcommand = 'crosstalk'

    def execute_run(self, config, writer, options):
        hw = config.hardware()
        if not isinstance(hw, TrapArrayModel):
            raise UsageError('Crosstalk reports need a uqs2 trap array')
        data = config.section('crosstalk')
        report = crosstalk_report(hw, data['groups'], data.get('threshold'))
        writer.table('crosstalk', CROSSTALK_COLUMNS, [(i, j, ratio) for (i, j), ratio in report.ratios])
        writer.json('crosstalk_summary.json', report.as_dict())
        verdict = 'concurrent' if report.concurrent else 'serialized'
        self.stdout.write(f'max ratio = {report.max_ratio!r} (threshold {report.threshold!r}): {verdict}')
        return None
