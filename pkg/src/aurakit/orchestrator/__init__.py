"""Acquisition/analysis workflows with condition-gated retries."""
from .runner import REPORT_FILE, Attempt, StageReport, WorkflowReport, read_report, run_workflow
from .spec import (COMPARATORS, Adjustment, Gate, GateExhausted, InvalidWorkflow, ResolutionError, Stage,
                   StageError, WorkflowError, WorkflowSpec, load_workflow)

__all__ = [
    "REPORT_FILE", "Attempt", "StageReport", "WorkflowReport", "read_report", "run_workflow", "COMPARATORS",
    "Adjustment", "Gate", "GateExhausted", "InvalidWorkflow", "ResolutionError", "Stage", "StageError",
    "WorkflowError", "WorkflowSpec", "load_workflow",
]
