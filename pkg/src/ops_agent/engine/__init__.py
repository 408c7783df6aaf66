from .document import ParseError, format_procedure, parse_procedure
from .executor import (
    ExecutionAborted,
    ExecutionReport,
    ExperimentEngine,
    NodeReport,
    ProcedureLockError,
    validate,
)
from .model import (
    ACTION_KINDS,
    MAX_TREE_DEPTH,
    Action,
    AskExpert,
    CycleMagnet,
    Parallel,
    PostLogbook,
    ProcedureNode,
    ReadValue,
    Scan,
    Serial,
    ValidationIssue,
    Wait,
    WriteValue,
    mutated_addresses,
    walk,
)

__all__ = [
    "ACTION_KINDS",
    "Action",
    "AskExpert",
    "CycleMagnet",
    "ExecutionAborted",
    "ExecutionReport",
    "ExperimentEngine",
    "MAX_TREE_DEPTH",
    "NodeReport",
    "Parallel",
    "ParseError",
    "PostLogbook",
    "ProcedureLockError",
    "ProcedureNode",
    "ReadValue",
    "Scan",
    "Serial",
    "ValidationIssue",
    "Wait",
    "WriteValue",
    "format_procedure",
    "mutated_addresses",
    "parse_procedure",
    "validate",
    "walk",
]
