# src/experiments/management/commands/carleson.py
from signal_core.csv_io import write_spectrum, write_values
from signal_core.services import spectrum
from ...monitoring import RunStage
from ...reports import write_report
from ...services import OPERATORS, load_signal, run_carleson
from ._base import ToolkitCommand


class Command(ToolkitCommand):
    help = 'Evaluate C_r f (or the grid Carleson maximal function) at every sample of a signal'

    def add_command_arguments(self, parser):
        parser.add_argument('signal', nargs='?', help='Signal CSV x,re,im (a seeded corpus draw when omitted)')
        parser.add_argument('--operator', choices=OPERATORS, default='variation')
        parser.add_argument('--probe', type=float, action='append', default=[],
                            help='Report the maximizing partition at this x (repeatable)')
        parser.add_argument('--spectrum', action='store_true', help='Also write the spectrum xi,re,im')

    def run(self, config, **options):
        with self.monitor.stage(RunStage.INPUT):
            f = load_signal(options['signal'], config, config.rng())
        with self.monitor.stage(RunStage.COMPUTE):
            values, report = run_carleson(config, f, options['operator'], options['probe'])
        with self.monitor.stage(RunStage.OUTPUT):
            csv_path, json_path = self.output_path('carleson.csv'), self.output_path('carleson.json')
            write_values(csv_path, values.x, values.samples.real)
            write_report(json_path, report)
            self.report_written(csv_path, json_path)
            if options['spectrum']:
                spectrum_path = self.output_path('spectrum.csv')
                write_spectrum(spectrum_path, spectrum(f, config.pad_factor))
                self.report_written(spectrum_path)
        self.monitor.log_metric('max value', f"{report.max_value:.6g}")
