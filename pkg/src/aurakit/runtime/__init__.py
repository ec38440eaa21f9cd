"""Execution, recording and abstraction of Type-1 skills."""
from .abstraction import (Abstraction, AbstractionError, AbstractionOptions, MixedModels, Unalignable,
                          abstract_traces, align, lcs_pairs)
from .executor import ExecutionLimits, execute_skill, export_relpath, run_skill
from .recorder import DemonstrationTrace, DemoStep, FeedError, IdleGap, record_session
from .trace import ExecutionTrace, TraceEvent, trace_digest

__all__ = [
    "Abstraction", "AbstractionError", "AbstractionOptions", "MixedModels", "Unalignable", "abstract_traces",
    "align", "lcs_pairs", "ExecutionLimits", "execute_skill", "export_relpath", "run_skill",
    "DemonstrationTrace", "DemoStep", "FeedError", "IdleGap", "record_session", "ExecutionTrace", "TraceEvent",
    "trace_digest",
]
