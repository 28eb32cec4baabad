# src/experiments/management/commands/defaults.py
from ...run_config import render_config
from ._base import ToolkitCommand


class Command(ToolkitCommand):
    help = 'Print the canonical run configuration (settings defaults, then --config and flags)'

    def run(self, config, **options):
        self.stdout.write(render_config(config), ending='')
