# src/experiments/management/commands/sparse.py
from signal_core.csv_io import write_signal
from ...monitoring import RunStage
from ...reports import write_report
from ...services import LINEARIZATIONS, load_signal, run_sparse
from ._base import ToolkitCommand


class Command(ToolkitCommand):
    help = 'Build a certified sparse collection for (f, g) and check the sparse domination ratio'

    def add_command_arguments(self, parser):
        parser.add_argument('f', nargs='?', help='Signal CSV of f (a seeded corpus draw when omitted)')
        parser.add_argument('g', nargs='?', help='Signal CSV of g (a seeded corpus draw when omitted)')
        parser.add_argument('--linearization', choices=LINEARIZATIONS, default='argmax')

    def run(self, config, **options):
        rng = config.rng()
        with self.monitor.stage(RunStage.INPUT):
            f = load_signal(options['f'], config, rng)
            g = load_signal(options['g'], config, rng)
        with self.monitor.stage(RunStage.COMPUTE):
            sparse, verification = run_sparse(config, f, g, rng, options['linearization'])
        with self.monitor.stage(RunStage.OUTPUT):
            sparse_path, verification_path = self.output_path('sparse.json'), self.output_path('verification.json')
            write_report(sparse_path, sparse)
            write_report(verification_path, verification)
            # the inputs, so verify can re-check a seeded run
            f_path, g_path = self.output_path('f.csv'), self.output_path('g.csv')
            write_signal(f_path, f)
            write_signal(g_path, g)
            self.report_written(sparse_path, verification_path, f_path, g_path)
        self.monitor.log_metric('intervals', len(sparse.intervals))
        self.monitor.log_metric('domination ratio', f"{verification.ratio:.6g}")
