"""Monte Carlo sweeps, result emission and the oracle validation suite."""

from .sweep import SweepResult, aggregate_records, benchmark_gains, record_columns, run_sweep
from .emitter import SweepSummary, build_summary, emit, load_summary
from .validation import ValidationReport, run_validation

__all__ = [
    "SweepResult",
    "aggregate_records",
    "benchmark_gains",
    "record_columns",
    "run_sweep",
    "SweepSummary",
    "build_summary",
    "emit",
    "load_summary",
    "ValidationReport",
    "run_validation",
]
