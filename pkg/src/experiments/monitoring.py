# src/experiments/monitoring.py
import time
from contextlib import contextmanager
from typing import Dict, Optional

from rich.console import Console
from rich.panel import Panel
from rich.table import Table
from rich.theme import Theme


class RunStage:
    """Stages shared by the experiment commands"""
    CONFIG = "Configuration"
    INPUT = "Signal Input"
    COMPUTE = "Computation"
    VERIFY = "Verification"
    OUTPUT = "Output"


class MonitoringTheme:
    CUSTOM_THEME = Theme({
        "info": "cyan",
        "success": "green",
        "warning": "yellow",
        "error": "red",
        "stage": "blue",
        "metric": "white",
    })


class RunMetrics:
    """Wall-clock stage timings of one command; never written to result files"""

    def __init__(self):
        self.start_time = time.perf_counter()
        self.end_time: Optional[float] = None
        self.success = False
        self.error: Optional[str] = None
        self.stage_timings: Dict[str, float] = {}

    def complete(self, success: bool, error: Optional[str] = None):
        self.end_time = time.perf_counter()
        self.success = success
        self.error = error

    @property
    def duration(self) -> float:
        end = self.end_time if self.end_time is not None else time.perf_counter()
        return end - self.start_time


class SystemMonitor:
    """Stage panels and timing tables on stderr"""

    def __init__(self, enabled: bool = True):
        self.console = Console(theme=MonitoringTheme.CUSTOM_THEME, stderr=True, quiet=not enabled)
        self.metrics = RunMetrics()
        self.current_stage: Optional[str] = None

    @contextmanager
    def stage(self, stage_name: str):
        self.current_stage = stage_name
        start = time.perf_counter()
        try:
            yield
        except Exception as e:
            self.fail_stage(stage_name, str(e))
            raise
        self.complete_stage(stage_name, time.perf_counter() - start)

    def complete_stage(self, stage_name: str, duration: float):
        self.metrics.stage_timings[stage_name] = self.metrics.stage_timings.get(stage_name, 0.0) + duration
        self.console.print(f"[success]✓ {stage_name}[/] [metric]{duration:.2f}s[/]")

    def fail_stage(self, stage_name: str, error: str):
        self.metrics.complete(False, error)
        self.console.print(Panel(f"[error]✗ {stage_name} failed\nError: {error}", title="Stage Error",
                                 border_style="red"))

    def log_metric(self, metric: str, value):
        self.console.print(f"[metric]{metric} = {value}")

    def display_summary(self):
        if self.metrics.end_time is None:
            self.metrics.complete(True)

        summary = Table(title="Run Summary", show_header=True, header_style="bold magenta")
        summary.add_column("Metric", style="cyan")
        summary.add_column("Value", style="yellow")
        summary.add_row("Total Duration", f"{self.metrics.duration:.2f}s")
        summary.add_row("Status", "[green]Success[/]" if self.metrics.success else "[red]Failed[/]")
        if self.metrics.error:
            summary.add_row("Error", f"[red]{self.metrics.error}[/]")
        self.console.print(summary)

        if self.metrics.stage_timings:
            timing_table = Table(title="Stage Timings", show_header=True, header_style="bold cyan")
            timing_table.add_column("Stage")
            timing_table.add_column("Duration (s)")
            timing_table.add_column("Percentage")
            total_time = sum(self.metrics.stage_timings.values()) or 1.0
            for stage, duration in self.metrics.stage_timings.items():
                timing_table.add_row(stage, f"{duration:.2f}", f"{duration / total_time * 100:.1f}%")
            self.console.print(timing_table)
