from .adapters import build_registry, format_value, summarize_report
from .builder import BuiltProcedure, ExperimentBuilder, NoMatchingTemplate, TEMPLATE_SCHEMAS
from .pending import (
    APPROVED,
    EXECUTED,
    PENDING,
    REJECTED,
    AlreadyResolved,
    ApprovalBroker,
    PendingWrite,
    UnknownPendingWrite,
)
from .registry import SessionContext, ToolRegistry

__all__ = [
    "APPROVED",
    "AlreadyResolved",
    "ApprovalBroker",
    "BuiltProcedure",
    "EXECUTED",
    "ExperimentBuilder",
    "NoMatchingTemplate",
    "PENDING",
    "PendingWrite",
    "REJECTED",
    "SessionContext",
    "TEMPLATE_SCHEMAS",
    "ToolRegistry",
    "UnknownPendingWrite",
    "build_registry",
    "format_value",
    "summarize_report",
]
