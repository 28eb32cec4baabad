# src/experiments/management/commands/reconstruct.py
from signal_core.csv_io import write_frame
from ...monitoring import RunStage
from ...reports import write_report
from ...services import run_reconstruct
from ._base import ToolkitCommand


class Command(ToolkitCommand):
    help = 'Reconstruct the multiplier of (xi-, xi+) from truncated wave packets on a zeta sweep'

    def add_command_arguments(self, parser):
        parser.add_argument('xi_minus', type=float)
        parser.add_argument('xi_plus', type=float)
        parser.add_argument('--zeta-count', type=int, default=161)
        parser.add_argument('--voices', type=int, default=32, help='Scales per octave of the quadrature')

    def run(self, config, **options):
        with self.monitor.stage(RunStage.COMPUTE):
            table, report = run_reconstruct(config, options['xi_minus'], options['xi_plus'],
                                            zeta_count=options['zeta_count'], scales_per_octave=options['voices'])
        with self.monitor.stage(RunStage.OUTPUT):
            csv_path, json_path = self.output_path('reconstruct.csv'), self.output_path('reconstruct.json')
            write_frame(csv_path, table)
            write_report(json_path, report)
            self.report_written(csv_path, json_path)
        if report.low_confidence:
            self.stdout.write(self.style.WARNING('Reconstruction is low confidence'))
