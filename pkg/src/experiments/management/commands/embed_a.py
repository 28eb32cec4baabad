# src/experiments/management/commands/embed_a.py
from signal_core.csv_io import read_signal, write_frame
from ...monitoring import RunStage
from ...reports import write_report
from ...services import load_signal, run_embed_a
from ._base import ToolkitCommand


class Command(ToolkitCommand):
    help = 'Dump the truncated embedding A(g)(u, t, eta) for an argmax or random linearization'

    def add_command_arguments(self, parser):
        parser.add_argument('signal', nargs='?', help='Signal CSV of g (a seeded corpus draw when omitted)')
        parser.add_argument('--linearize', help='Signal CSV of f; linearize at the maximizing partitions of C_r f')

    def run(self, config, **options):
        rng = config.rng()
        with self.monitor.stage(RunStage.INPUT):
            g = load_signal(options['signal'], config, rng)
            f = read_signal(options['linearize']) if options['linearize'] else None
        with self.monitor.stage(RunStage.COMPUTE):
            field, report = run_embed_a(config, g, f, rng)
        with self.monitor.stage(RunStage.OUTPUT):
            csv_path, json_path = self.output_path('embed_a.csv'), self.output_path('embed_a.json')
            write_frame(csv_path, field.to_frame())
            write_report(json_path, report)
            self.report_written(csv_path, json_path)
