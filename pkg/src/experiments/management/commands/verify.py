# src/experiments/management/commands/verify.py
import json

from signal_core.csv_io import read_signal
from signal_core.exceptions import SignalFileError
from ...monitoring import RunStage
from ...reports import write_report
from ...services import run_verify
from ._base import ToolkitCommand


class Command(ToolkitCommand):
    help = 'Re-certify a sparse collection written by the sparse command and recompute its domination ratio'

    def add_command_arguments(self, parser):
        parser.add_argument('f', help='Signal CSV of f')
        parser.add_argument('g', help='Signal CSV of g')
        parser.add_argument('collection', help='sparse.json written by the sparse command')

    def run(self, config, **options):
        with self.monitor.stage(RunStage.INPUT):
            f, g = read_signal(options['f']), read_signal(options['g'])
            try:
                with open(options['collection']) as handle:
                    report = json.load(handle)
            except (OSError, json.JSONDecodeError) as e:
                raise SignalFileError(f"Could not read sparse collection {options['collection']}: {str(e)}")
        with self.monitor.stage(RunStage.VERIFY):
            verification = run_verify(config, f, g, report)
        with self.monitor.stage(RunStage.OUTPUT):
            path = self.output_path('verification.json')
            write_report(path, verification)
            self.report_written(path)
        self.monitor.log_metric('domination ratio', f"{verification.ratio:.6g}")
