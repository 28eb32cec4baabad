# src/experiments/management/commands/_base.py
import logging
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from config import config as app_config
from core.exceptions import ToolkitError
from ...monitoring import RunStage, SystemMonitor
from ...run_config import RunConfig, load_run_config

logger = logging.getLogger(__name__)


class ToolkitCommand(BaseCommand):
    """Shared flags, config validation, stage monitoring and exit codes

    Subclasses implement add_command_arguments() and run(config, **options).
    Toolkit errors leave with their exit code: 2 configuration, 3 input,
    4 failed invariant.
    """

    def add_arguments(self, parser):
        parser.add_argument('--config', help='KEY=VALUE run configuration file')
        parser.add_argument('--seed', type=int, help='Seed of the run generator (overrides the config)')
        parser.add_argument('--out-dir', help='Directory for result files')
        parser.add_argument('--threads', type=int, help='Worker threads (overrides the config)')
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def handle(self, *args, **options):
        tracking = settings.MONITORING_SETTINGS['ENABLE_PERFORMANCE_TRACKING']
        self.monitor = SystemMonitor(enabled=tracking and options['verbosity'] > 0)
        try:
            with self.monitor.stage(RunStage.CONFIG):
                config = load_run_config(options['config'], seed=options['seed'], threads=options['threads'])
            self.out_dir = Path(options['out_dir'] or app_config['OUT_DIR'])
            self.run(config, **{k: v for k, v in options.items() if k != 'config'})
        except ToolkitError as e:
            logger.error(f"{type(e).__name__}: {str(e)}")
            raise CommandError(f"{type(e).__name__}: {str(e)}", returncode=e.exit_code)
        self.monitor.display_summary()

    def run(self, config: RunConfig, **options):
        raise NotImplementedError

    def output_path(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir / name

    def report_written(self, *paths):
        for path in paths:
            self.stdout.write(self.style.SUCCESS(f'Wrote {path}'))
