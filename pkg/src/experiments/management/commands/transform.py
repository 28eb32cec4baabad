# src/experiments/management/commands/transform.py
from signal_core.csv_io import write_frame
from ...monitoring import RunStage
from ...reports import write_report
from ...services import load_signal, run_transform
from ._base import ToolkitCommand


class Command(ToolkitCommand):
    help = 'Dump the wave packet embedding F(f)(u, t, eta) of a signal as u,t,eta,value'

    def add_command_arguments(self, parser):
        parser.add_argument('signal', nargs='?', help='Signal CSV x,re,im (a seeded corpus draw when omitted)')

    def run(self, config, **options):
        with self.monitor.stage(RunStage.INPUT):
            f = load_signal(options['signal'], config, config.rng())
        with self.monitor.stage(RunStage.COMPUTE):
            field, report = run_transform(config, f)
        with self.monitor.stage(RunStage.OUTPUT):
            csv_path, json_path = self.output_path('transform.csv'), self.output_path('transform.json')
            write_frame(csv_path, field.to_frame())
            write_report(json_path, report)
            self.report_written(csv_path, json_path)
        self.monitor.log_metric('tiles', field.grid.tile_count)
