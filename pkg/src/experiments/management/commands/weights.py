# src/experiments/management/commands/weights.py
from signal_core.csv_io import write_frame
from ...monitoring import RunStage
from ...reports import write_report
from ...services import run_weights
from ._base import ToolkitCommand


class Command(ToolkitCommand):
    help = 'Power-weight experiment: A_t constants against the weighted operator ratio of C_r'

    def run(self, config, **options):
        with self.monitor.stage(RunStage.COMPUTE):
            table, report = run_weights(config, config.rng())
        with self.monitor.stage(RunStage.OUTPUT):
            csv_path, json_path = self.output_path('weights.csv'), self.output_path('weights.json')
            write_frame(csv_path, table)
            write_report(json_path, report)
            self.report_written(csv_path, json_path)
        self.monitor.log_metric('slope', f"{report.slope:.4g} (bound {report.bound:.4g})")
